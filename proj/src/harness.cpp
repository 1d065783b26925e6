#include "atb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "atb/uai.hpp"
#include "json.hpp"

namespace atb {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* name_of(Command c) {
  switch (c) {
    case Command::bounds: return "bounds";
    case Command::pe: return "pe";
    case Command::compare: return "compare";
  }
  return "?";
}
const char* name_of(CutsetChoice c) { return c == CutsetChoice::loop ? "loop" : "w"; }
const char* name_of(PluginChoice p) { return p == PluginChoice::bf ? "bf" : "abdp"; }
const char* name_of(OracleMode o) {
  switch (o) {
    case OracleMode::on: return "on";
    case OracleMode::off: return "off";
    case OracleMode::automatic: return "auto";
  }
  return "?";
}

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("cannot write " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

double mean_interval(const BoundsReport& report, Method method) {
  CompensatedSum width;
  std::size_t count = 0;
  for (const auto& vr : report.variables) {
    const auto& ivs = method == Method::atb ? vr.atb : vr.bc;
    for (const Interval& iv : ivs) width += iv.width();
    count += ivs.size();
  }
  if (count == 0) throw ModelError("mean interval of an empty report");
  return width.value() / static_cast<double>(count);
}

double midpoint_error(const BoundsReport& report, const PosteriorTables& exact, Method method) {
  CompensatedSum err;
  std::size_t count = 0;
  for (const auto& vr : report.variables) {
    const auto& ivs = method == Method::atb ? vr.atb : vr.bc;
    if (vr.variable >= exact.size() || exact[vr.variable].size() != ivs.size())
      throw ModelError("exact reference does not cover variable " + std::to_string(vr.variable));
    for (std::size_t x = 0; x < ivs.size(); ++x)
      err += std::abs(exact[vr.variable][x] - 0.5 * (ivs[x].lower + ivs[x].upper));
    count += ivs.size();
  }
  if (count == 0) throw ModelError("midpoint error of an empty report");
  return err.value() / static_cast<double>(count);
}

double coverage_pct(double s, double exact_pe) {
  if (exact_pe <= 0.0) throw ModelError("coverage needs P(e) > 0");
  return std::min(100.0, std::max(0.0, 100.0 * s / exact_pe));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const BayesianNetwork& bn, const Evidence& e) {
  e.validate(bn);
  if (config.h_values.empty()) throw ModelError("no h value requested");
  ExperimentResult res;
  res.config = config;
  res.variables = bn.size();
  res.evidence_count = e.size();

  auto t0 = Clock::now();
  const Cutset raw = config.cutset == CutsetChoice::loop ? find_loop_cutset(bn) : find_w_cutset(bn, config.w);
  res.cutset = without_evidence(raw, e);
  res.space_size = cutset_space_size(bn, res.cutset);

  std::vector<std::size_t> hs = config.h_values;
  for (std::size_t& h : hs) {
    if (h > res.space_size) {
      res.warnings.push_back("h = " + std::to_string(h) + " exceeds the cutset space; clamped to " +
                             std::to_string(res.space_size));
      h = res.space_size;
    }
  }
  const std::size_t h_max = *std::max_element(hs.begin(), hs.end());
  ActiveTupleSet all = select_tuples_gibbs(bn, e, res.cutset, h_max, config.sweeps, config.seed);
  ensure_joint_tables(bn, e, all);
  res.times.selection_s = seconds_since(t0);

  t0 = Clock::now();
  if (config.oracle != OracleMode::off) {
    try {
      const double pe = bucket_eliminate_pe(bn, e);
      if (pe <= 0.0) throw Error("evidence has zero probability");
      res.exact_pe = pe;
      res.exact = bucket_eliminate_marginals(bn, e);
    } catch (const InferenceError&) {
      if (config.oracle == OracleMode::on) throw;
      res.warnings.push_back("exact reference skipped: instance exceeds the bucket scope cap");
    }
  }
  res.times.reference_s = seconds_since(t0);

  std::unique_ptr<JointBounder> bounder;
  if (config.plugin == PluginChoice::bf) {
    bounder = std::make_unique<BruteForceBounder>(bn, e);
  } else {
    AbdpOptions opt;
    opt.bdp.k = config.k;
    opt.bdp.max_iters = config.max_iters;
    opt.bdp.tol = config.tol;
    bounder = std::make_unique<AbdpBounder>(bn, e, opt);
  }
  BoundCache cache(*bounder, res.cutset);

  t0 = Clock::now();
  for (std::size_t h : hs) {
    const auto t_row = Clock::now();
    const std::size_t before = cache.evaluations();
    const ActiveTupleSet active = all.prefix(h);
    const TruncatedTree tree = build_truncated_tree(active);
    const AtbInputs in{bn, e, active, tree, cache};

    ExperimentRow row;
    if (config.command == Command::pe) {
      row.report.h = h;
      row.report.m_prime = tree.size();
      row.report.cutset_size = res.cutset.size();
      row.report.s = active.mass();
      row.report.r = unexplored_prior_mass(active);
      row.report.i_h = interval_bound_ih(active);
      const EvidenceBounds eb = atb_evidence_bounds(in);
      row.report.pe = eb.interval;
      row.report.clamp_events = eb.clamped ? 1 : 0;
      row.report.bounder_evaluations = cache.evaluations();
    } else {
      row.report = compute_bounds_report(in, config.jobs);
    }
    row.bounder_evaluations = cache.evaluations() - before;

    MetricsSummary& m = row.metrics;
    m.h = h;
    m.m_prime = tree.size();
    m.i_h = row.report.i_h;
    m.pe = row.report.pe;
    if (!row.report.variables.empty()) {
      m.mean_interval_atb = mean_interval(row.report, Method::atb);
      m.mean_interval_bc = mean_interval(row.report, Method::bc);
      if (res.exact) {
        m.delta_atb = midpoint_error(row.report, *res.exact, Method::atb);
        m.delta_bc = midpoint_error(row.report, *res.exact, Method::bc);
      }
    }
    if (res.exact_pe) m.coverage = coverage_pct(active.mass(), *res.exact_pe);
    row.bounds_s = seconds_since(t_row);
    res.rows.push_back(std::move(row));
  }
  res.times.bounds_s = seconds_since(t0);
  return res;
}

std::string to_json(const ExperimentResult& res, bool include_timing) {
  const ExperimentConfig& c = res.config;
  Json doc;
  Json hs = Json::array();
  for (std::size_t h : c.h_values) hs.push_back(h);
  doc["config"] = {{"command", name_of(c.command)},
                   {"network", c.network.string()},
                   {"evidence", c.evidence.string()},
                   {"cutset", name_of(c.cutset)},
                   {"w", c.w},
                   {"h", hs},
                   {"sweep", c.sweep},
                   {"plugin", name_of(c.plugin)},
                   {"k", c.k},
                   {"max_iters", c.max_iters},
                   {"tol", c.tol},
                   {"sweeps", c.sweeps},
                   {"seed", c.seed},
                   {"oracle", name_of(c.oracle)}};
  doc["network"] = {{"variables", res.variables}, {"evidence", res.evidence_count}};
  Json cut = Json::array();
  for (VarId v : res.cutset.variables) cut.push_back(v);
  doc["cutset"] = {{"kind", name_of(c.cutset)}, {"variables", cut}, {"space_size", res.space_size}};
  doc["exact"] = {{"available", res.exact_pe.has_value()}, {"pe", optional_number(res.exact_pe)}};

  Json runs = Json::array();
  for (const ExperimentRow& row : res.rows) {
    const BoundsReport& r = row.report;
    const MetricsSummary& m = row.metrics;
    Json queries = Json::array();
    for (const VariableReport& vr : r.variables) {
      for (std::size_t x = 0; x < vr.atb.size(); ++x) {
        Json q = {{"variable", vr.variable},
                  {"value", x},
                  {"cutset", vr.cutset},
                  {"atb", {vr.atb[x].lower, vr.atb[x].upper}},
                  {"bc", {vr.bc[x].lower, vr.bc[x].upper}}};
        q["exact"] = res.exact ? Json((*res.exact)[vr.variable][x]) : Json(nullptr);
        queries.push_back(std::move(q));
      }
    }
    Json run;
    run["h"] = r.h;
    run["m_prime"] = r.m_prime;
    run["pe"] = {{"lower", r.pe.lower}, {"upper", r.pe.upper}};
    run["queries"] = std::move(queries);
    run["metrics"] = {{"mean_interval_atb", optional_number(m.mean_interval_atb)},
                      {"mean_interval_bc", optional_number(m.mean_interval_bc)},
                      {"delta_atb", optional_number(m.delta_atb)},
                      {"delta_bc", optional_number(m.delta_bc)},
                      {"coverage_pct", optional_number(m.coverage)},
                      {"i_h", m.i_h},
                      {"s", r.s},
                      {"r", r.r}};
    run["counters"] = {{"bounder_evaluations", row.bounder_evaluations},
                       {"max_queries_per_variable", r.max_queries_per_variable},
                       {"clamp_events", r.clamp_events},
                       {"degenerate", r.degenerate_count}};
    runs.push_back(std::move(run));
  }
  doc["runs"] = std::move(runs);
  Json warnings = Json::array();
  for (const auto& w : res.warnings) warnings.push_back(w);
  doc["warnings"] = std::move(warnings);
  if (include_timing) {
    Json per_row = Json::array();
    for (const ExperimentRow& row : res.rows) per_row.push_back(row.bounds_s);
    doc["timing"] = {{"selection_s", res.times.selection_s},
                     {"reference_s", res.times.reference_s},
                     {"bounds_s", res.times.bounds_s},
                     {"per_h_s", per_row}};
  }
  return doc.dump(2) + "\n";
}

std::string to_csv(const ExperimentResult& res) {
  std::ostringstream os;
  auto opt = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
  switch (res.config.command) {
    case Command::bounds: {
      os << "variable,value,lower,upper,width,exact,method\n";
      if (res.rows.empty()) break;
      for (const VariableReport& vr : res.rows.back().report.variables) {
        for (int pass = 0; pass < 2; ++pass) {
          const auto& ivs = pass == 0 ? vr.atb : vr.bc;
          for (std::size_t x = 0; x < ivs.size(); ++x) {
            os << vr.variable << ',' << x << ',' << fmt(ivs[x].lower) << ',' << fmt(ivs[x].upper) << ','
               << fmt(ivs[x].width()) << ',';
            if (res.exact) os << fmt((*res.exact)[vr.variable][x]);
            os << ',' << (pass == 0 ? "atb" : "bc") << '\n';
          }
        }
      }
      break;
    }
    case Command::pe:
      os << "h,m_prime,lower,upper,width,exact,coverage\n";
      for (const ExperimentRow& row : res.rows) {
        const Interval& pe = row.report.pe;
        os << row.report.h << ',' << row.report.m_prime << ',' << fmt(pe.lower) << ',' << fmt(pe.upper) << ','
           << fmt(pe.width()) << ',' << opt(res.exact_pe) << ',' << opt(row.metrics.coverage) << '\n';
      }
      break;
    case Command::compare:
      os << "h,m_prime,coverage,i_h,mean_interval_atb,mean_interval_bc,delta_atb,delta_bc,pe_lower,pe_upper\n";
      for (const ExperimentRow& row : res.rows) {
        const MetricsSummary& m = row.metrics;
        os << m.h << ',' << m.m_prime << ',' << opt(m.coverage) << ',' << fmt(m.i_h) << ','
           << opt(m.mean_interval_atb) << ',' << opt(m.mean_interval_bc) << ',' << opt(m.delta_atb) << ','
           << opt(m.delta_bc) << ',' << fmt(m.pe.lower) << ',' << fmt(m.pe.upper) << '\n';
      }
      break;
  }
  return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const BayesianNetwork bn = parse_network(read_text_file(config.network));
  const Evidence e = config.evidence.empty() ? Evidence{} : parse_evidence(read_text_file(config.evidence), bn);
  ExperimentResult res = run_experiment(config, bn, e);
  std::vector<std::filesystem::path> written;
  try {
    if (config.out_json) {
      write_atomically(*config.out_json, to_json(res));
      written.push_back(*config.out_json);
    }
    if (config.out_csv) {
      write_atomically(*config.out_csv, to_csv(res));
      written.push_back(*config.out_csv);
    }
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p);
    throw;
  }
  return res;
}

}  // namespace atb
