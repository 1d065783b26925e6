// atb: anytime posterior and evidence bounds for Bayesian networks.
//
//   atb bounds  --network net.uai --evidence net.evid --h 16 --out-csv b.csv
//   atb pe      --network net.uai --sweep-h 1,4,16 --plugin bf
//   atb compare --network net.uai --sweep-h 1,2,4,8 --out-json r.json

#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "atb/harness.hpp"

namespace {

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(item, &pos);
    if (pos != item.size()) throw CLI::ValidationError("--sweep-h", "not an integer: " + item);
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw CLI::ValidationError("--sweep-h", "empty list");
  return out;
}

void add_common(CLI::App* cmd, atb::ExperimentConfig& cfg, std::size_t& h, std::string& sweep, std::string& json,
                std::string& csv) {
  cmd->set_help_flag("--help", "print this help and exit");
  cmd->add_option("--network", cfg.network, "network in UAI BAYES format")->required()->check(CLI::ExistingFile);
  cmd->add_option("--evidence", cfg.evidence, "evidence file")->check(CLI::ExistingFile);
  cmd->add_option("--cutset", cfg.cutset, "cutset kind")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, atb::CutsetChoice>{{"loop", atb::CutsetChoice::loop}, {"w", atb::CutsetChoice::w}}));
  cmd->add_option("--w", cfg.w, "induced-width target for --cutset w");
  auto* h_opt = cmd->add_option("--h", h, "number of active cutset tuples");
  cmd->add_option("--sweep-h", sweep, "comma-separated list of h values")->excludes(h_opt);
  cmd->add_option("--plugin", cfg.plugin, "plug-in bounder")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, atb::PluginChoice>{{"bf", atb::PluginChoice::bf}, {"abdp", atb::PluginChoice::abdp}}));
  cmd->add_option("--k", cfg.k, "bound propagation Markov boundary cap")->check(CLI::PositiveNumber);
  cmd->add_option("--sweeps", cfg.sweeps, "Gibbs sweeps for tuple selection");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--jobs", cfg.jobs, "threads for plug-in queries")->check(CLI::PositiveNumber);
  cmd->add_option("--out-json", json, "JSON report path");
  cmd->add_option("--out-csv", csv, "CSV report path");
  cmd->add_option("--oracle", cfg.oracle, "exact reference")
      ->transform(CLI::CheckedTransformer(std::map<std::string, atb::OracleMode>{
          {"on", atb::OracleMode::on}, {"off", atb::OracleMode::off}, {"auto", atb::OracleMode::automatic}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime bounds on posterior marginals and P(e)"};
  app.require_subcommand(1);

  atb::ExperimentConfig cfg;
  std::size_t h = 1;
  std::string sweep;
  std::string json;
  std::string csv;
  const std::pair<const char*, atb::Command> commands[] = {
      {"bounds", atb::Command::bounds}, {"pe", atb::Command::pe}, {"compare", atb::Command::compare}};
  const char* help[] = {"posterior intervals", "evidence bounds", "ATB vs bounded conditioning over h"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < 3; ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, help[i]));
    add_common(subs.back(), cfg, h, sweep, json, csv);
  }
  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < 3; ++i)
    if (subs[i]->parsed()) cfg.command = commands[i].second;
  try {
    if (!sweep.empty()) {
      cfg.h_values = parse_list(sweep);
      cfg.sweep = true;
    } else {
      cfg.h_values = {h};
    }
    if (!json.empty()) cfg.out_json = json;
    if (!csv.empty()) cfg.out_csv = csv;

    const atb::ExperimentResult res = atb::run_experiment(cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    if (!cfg.out_csv) std::cout << atb::to_csv(res);
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
