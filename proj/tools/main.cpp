#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "switchtrack/commands.hpp"
#include "switchtrack/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string mode;
  std::string criterion;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool debug = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON experiment config");
  cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", flags.seed, "RNG seed (overrides config)")
      ->each([&flags](const std::string&) { flags.seed_given = true; });
  cmd->add_option("--mode", flags.mode, "stream or offline")
      ->check(CLI::IsMember({"stream", "offline"}));
  cmd->add_option("--criterion", flags.criterion, "state criterion")
      ->check(CLI::IsMember({"apriori", "aposteriori"}));
  cmd->add_flag("--debug", flags.debug, "write a JSONL event log");
}

// Flags win over config, config wins over defaults.
switchtrack::ExperimentConfig resolve_config(const CommonFlags& flags) {
  switchtrack::ExperimentConfig config;
  if (!flags.config_path.empty())
    config = switchtrack::load_experiment_config(flags.config_path);
  if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
  if (flags.seed_given) config.rng_seed = flags.seed;
  if (!flags.mode.empty())
    config.mode = flags.mode == "stream" ? switchtrack::RunMode::stream
                                         : switchtrack::RunMode::offline;
  if (!flags.criterion.empty())
    config.tracker.state_criterion = flags.criterion == "apriori"
                                         ? switchtrack::StateCriterion::apriori
                                         : switchtrack::StateCriterion::aposteriori;
  if (flags.debug) config.debug_log = true;
  return config;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const switchtrack::NumericalError*>(&e)) return 4;
  if (dynamic_cast<const switchtrack::ParseError*>(&e) ||
      dynamic_cast<const switchtrack::DataError*>(&e))
    return 3;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-network topology tracking from cascade data"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string manifest_path, results_dir, truth_manifest, matrix_path, events_path;
  int k_sparsity = 1;
  int n_intervals = 180;
  int min_infected = 100;

  CLI::App* generate = app.add_subcommand("generate", "synthesize a dataset");
  add_common(generate, flags);

  CLI::App* track_cmd = app.add_subcommand("track", "initialize and track a stream");
  add_common(track_cmd, flags);
  track_cmd->add_option("manifest", manifest_path, "dataset manifest.json")->required();

  CLI::App* cluster = app.add_subcommand("cluster-identify",
                                         "closed-form identification by clustering");
  add_common(cluster, flags);
  cluster->add_option("manifest", manifest_path, "dataset manifest.json")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "score results against truth");
  add_common(evaluate, flags);
  evaluate->add_option("results", results_dir, "results directory")->required();
  evaluate->add_option("truth", truth_manifest, "ground-truth manifest.json")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep (lambda or S)");
  add_common(sweep, flags);
  sweep->add_option("manifest", manifest_path, "dataset manifest.json")->required();

  CLI::App* ident = app.add_subcommand("identifiability", "recovery-condition report");
  add_common(ident, flags);
  ident->add_option("matrix", matrix_path, "susceptibility matrix CSV")->required();
  ident->add_option("--k", k_sparsity, "per-row sparsity bound");

  CLI::App* preprocess = app.add_subcommand("preprocess", "event log -> dataset");
  add_common(preprocess, flags);
  preprocess->add_option("events", events_path, "JSONL or CSV event log")->required();
  preprocess->add_option("--intervals", n_intervals, "number of time intervals");
  preprocess->add_option("--min-infected", min_infected,
                         "minimum distinct infected nodes per cascade");

  CLI11_PARSE(app, argc, argv);

  try {
    const switchtrack::ExperimentConfig config = resolve_config(flags);
    if (generate->parsed()) {
      std::cout << switchtrack::cmd_generate(config) << "\n";
    } else if (track_cmd->parsed()) {
      if (config.mode == switchtrack::RunMode::offline)
        switchtrack::cmd_cluster_identify(manifest_path, config);
      else
        switchtrack::cmd_track(manifest_path, config);
      std::cout << config.output_dir << "\n";
    } else if (cluster->parsed()) {
      switchtrack::cmd_cluster_identify(manifest_path, config);
      std::cout << config.output_dir << "\n";
    } else if (evaluate->parsed()) {
      const std::string out = flags.out_dir.empty() ? results_dir : flags.out_dir;
      const auto report = switchtrack::cmd_evaluate(results_dir, truth_manifest, out);
      std::cout << "state_accuracy=" << report.state_accuracy_overall
                << " tail=" << report.state_accuracy_tail << "\n";
    } else if (sweep->parsed()) {
      switchtrack::cmd_sweep(manifest_path, config);
      std::cout << config.output_dir << "/sweep.csv\n";
    } else if (ident->parsed()) {
      const std::string out = flags.out_dir.empty()
                                  ? "identifiability.json"
                                  : flags.out_dir + "/identifiability.json";
      const auto report = switchtrack::cmd_identifiability(matrix_path, k_sparsity, out);
      std::cout << "prop1_ok=" << report.prop1_ok << " prop2_ok=" << report.prop2_ok
                << " kruskal_rank=" << report.kruskal_rank_xt << "\n";
    } else if (preprocess->parsed()) {
      switchtrack::PreprocessConfig pconfig;
      pconfig.n_intervals = n_intervals;
      pconfig.min_infected = min_infected;
      std::cout << switchtrack::cmd_preprocess(
                       events_path, pconfig,
                       flags.out_dir.empty() ? config.output_dir : flags.out_dir)
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
