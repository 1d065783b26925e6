#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atb/atb.hpp"

namespace atb {

enum class Method { atb, bc };

/// Mean of U - L over every (variable, value) in the report.
/// Throws ModelError on an empty report.
double mean_interval(const BoundsReport& report, Method method = Method::atb);
/// Mean of |P - (L + U) / 2| against exact posteriors.
double midpoint_error(const BoundsReport& report, const PosteriorTables& exact, Method method = Method::atb);
/// 100 * S / P(e). Throws ModelError when P(e) = 0.
double coverage_pct(double s, double exact_pe);
inline double coverage_pct(const AtbInputs& in, double exact_pe) { return coverage_pct(in.active.mass(), exact_pe); }

struct PhaseTimes {
  double selection_s = 0.0;
  double reference_s = 0.0;
  double bounds_s = 0.0;
};

struct MetricsSummary {
  std::size_t h = 0;
  std::size_t m_prime = 0;
  std::optional<double> mean_interval_atb;  // absent for an evidence-only run
  std::optional<double> mean_interval_bc;
  std::optional<double> delta_atb;  // absent without an exact reference
  std::optional<double> delta_bc;
  std::optional<double> coverage;
  double i_h = 1.0;
  Interval pe;
};

enum class Command { bounds, pe, compare };
enum class CutsetChoice { loop, w };
enum class PluginChoice { bf, abdp };
enum class OracleMode { on, off, automatic };

struct ExperimentConfig {
  Command command = Command::bounds;
  std::filesystem::path network;
  std::filesystem::path evidence;  // empty means no evidence
  CutsetChoice cutset = CutsetChoice::loop;
  std::size_t w = 2;
  std::vector<std::size_t> h_values{1};
  bool sweep = false;
  PluginChoice plugin = PluginChoice::abdp;
  std::size_t k = 1024;
  std::size_t max_iters = 50;
  double tol = 1e-6;
  std::size_t sweeps = 100;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> out_json;
  std::optional<std::filesystem::path> out_csv;
  OracleMode oracle = OracleMode::automatic;
};

struct ExperimentRow {
  BoundsReport report;
  MetricsSummary metrics;
  std::size_t bounder_evaluations = 0;  // new plug-in calls for this row
  double bounds_s = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::size_t variables = 0;
  std::size_t evidence_count = 0;
  Cutset cutset;
  std::size_t space_size = 0;
  std::optional<double> exact_pe;
  std::optional<PosteriorTables> exact;
  std::vector<ExperimentRow> rows;
  std::vector<std::string> warnings;
  PhaseTimes times;
};

/// Runs the pipeline on an in-memory instance: cutset, tuple selection, exact
/// sums, plug-in bounds over the frontier, assembly. Each requested h > M is
/// clamped to M with a warning.
ExperimentResult run_experiment(const ExperimentConfig& config, const BayesianNetwork& bn, const Evidence& e);

/// JSON document; timing fields live under the top-level "timing" key only.
std::string to_json(const ExperimentResult& result, bool include_timing = true);
/// bounds: one row per (variable, value, method) of the last h.
/// pe: one row per h. compare: one summary row per h.
std::string to_csv(const ExperimentResult& result);

/// Loads the files named in `config`, runs, and writes the requested outputs
/// (via temporary files, so nothing partial is left behind on failure).
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace atb
