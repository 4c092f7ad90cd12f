#include "switchtrack/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>

#include "switchtrack/io.hpp"
#include "switchtrack/metrics.hpp"
#include "switchtrack/sem.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace switchtrack {

namespace {

// One-line progress at info level; JSONL event stream at debug level.
class RunLogger {
 public:
  RunLogger(const std::string& dir, bool debug) {
    if (debug) events_.open((fs::path(dir) / "events.jsonl").string());
  }

  void info(const std::string& line) { std::clog << "[info] " << line << "\n"; }

  void event(const std::string& kind, json payload) {
    if (!events_.is_open()) return;
    payload["event"] = kind;
    events_ << payload.dump() << "\n";
  }

 private:
  std::ofstream events_;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInputError("config parse error in " + path + ": " + e.what());
  }
}

StepRule parse_step_rule(const std::string& s) {
  if (s == "exact_lipschitz") return StepRule::exact_lipschitz;
  if (s == "backtracking") return StepRule::backtracking;
  throw InvalidInputError("unknown step_rule: " + s);
}

StateCriterion parse_criterion(const std::string& s) {
  if (s == "apriori") return StateCriterion::apriori;
  if (s == "aposteriori") return StateCriterion::aposteriori;
  throw InvalidInputError("unknown state_criterion: " + s);
}

SwitchMode parse_switch_mode(const std::string& s) {
  if (s == "iid") return SwitchMode::iid;
  if (s == "piecewise") return SwitchMode::piecewise;
  throw InvalidInputError("unknown switch_mode: " + s);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// lambda accepts either a scalar (broadcast later) or a per-state array.
std::vector<double> parse_lambda(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

std::vector<double> broadcast_lambda(const std::vector<double>& lambda, int n_states) {
  if (static_cast<int>(lambda.size()) == n_states) return lambda;
  if (lambda.size() == 1) return std::vector<double>(n_states, lambda[0]);
  throw InvalidInputError("tracker lambda must be scalar or have one entry per state");
}

int kronecker_power_for(int n_nodes, int seed_dim) {
  int power = 0;
  long long size = 1;
  while (size < n_nodes) {
    size *= seed_dim;
    ++power;
  }
  if (size != n_nodes)
    throw InvalidInputError("n_nodes must be a power of " + std::to_string(seed_dim) +
                            " for the Kronecker state set");
  return power;
}

void write_states(const std::string& dir, const std::vector<StatePair>& states) {
  fs::create_directories(fs::path(dir) / "states");
  for (size_t s = 0; s < states.size(); ++s) {
    const std::string tag = std::to_string(s + 1);
    write_matrix_csv((fs::path(dir) / "states" / ("A_" + tag + ".csv")).string(),
                     states[s].a);
    write_vector_csv((fs::path(dir) / "states" / ("B_" + tag + ".csv")).string(),
                     states[s].b);
  }
}

std::vector<StatePair> read_states(const std::string& dir, int n_states) {
  std::vector<StatePair> states(n_states);
  for (int s = 0; s < n_states; ++s) {
    const std::string tag = std::to_string(s + 1);
    states[s].a = read_matrix_csv((fs::path(dir) / "states" / ("A_" + tag + ".csv")).string());
    states[s].b = read_vector_csv((fs::path(dir) / "states" / ("B_" + tag + ".csv")).string());
    states[s].state_id = s + 1;
  }
  return states;
}

void write_metrics_json(const std::string& dir, json body) {
  body["schema_version"] = 1;
  std::ofstream out((fs::path(dir) / "metrics.json").string());
  out << body.dump(2) << "\n";
}

// Per-interval best-matching relative error against the active truth state.
double best_match_error(const StatePair& truth, const std::vector<StatePair>& estimates) {
  double best = std::numeric_limits<double>::infinity();
  for (const StatePair& est : estimates)
    best = std::min(best, relative_error(truth, est));
  return best;
}

void write_error_curve(const std::string& dir, const std::vector<double>& curve) {
  std::ofstream out((fs::path(dir) / "error_curve.csv").string());
  out << "t,relative_error\n";
  for (size_t t = 0; t < curve.size(); ++t)
    out << (t + 1) << "," << format_double(curve[t]) << "\n";
}

}  // namespace

void ClusteringConfig::validate() const {
  if (n_states < 1) throw InvalidInputError("clustering: n_states must be >= 1");
  if (t_cluster < 0) throw InvalidInputError("clustering: t_cluster must be >= 0");
}

void ExperimentConfig::validate() const {
  ridge.validate(clustering.n_states);
  clustering.validate();
  TrackerConfig broadcast = tracker;
  broadcast.lambda = broadcast_lambda(tracker.lambda, clustering.n_states);
  broadcast.validate(clustering.n_states);
  if (sweep) {
    if (sweep->parameter != "lambda" && sweep->parameter != "S")
      throw InvalidInputError("sweep parameter must be \"lambda\" or \"S\"");
    if (sweep->values.empty()) throw InvalidInputError("sweep: empty value list");
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const json j = read_json_file(path);
  ExperimentConfig config;
  try {
    maybe(j, "output_dir", config.output_dir);
    maybe(j, "rng_seed", config.rng_seed);
    maybe(j, "debug_log", config.debug_log);
    if (j.contains("mode")) {
      const std::string m = j.at("mode");
      if (m == "stream")
        config.mode = RunMode::stream;
      else if (m == "offline")
        config.mode = RunMode::offline;
      else
        throw InvalidInputError("unknown mode: " + m);
    }
    if (j.contains("generation")) {
      const json& g = j.at("generation");
      maybe(g, "n_nodes", config.generation.n_nodes);
      maybe(g, "n_cascades", config.generation.n_cascades);
      maybe(g, "n_intervals", config.generation.n_intervals);
      maybe(g, "n_states", config.generation.n_states);
      maybe(g, "noise_std", config.generation.noise_std);
      maybe(g, "spectral_scale", config.generation.spectral_scale);
      maybe(g, "state_probabilities", config.generation.state_probabilities);
      if (g.contains("switch_mode"))
        config.generation.switch_mode = parse_switch_mode(g.at("switch_mode"));
      config.generation.rng_seed = config.rng_seed;
    }
    if (j.contains("ridge")) {
      const json& r = j.at("ridge");
      maybe(r, "mu", config.ridge.mu);
      maybe(r, "t_init", config.ridge.t_init);
      maybe(r, "max_alt_iters", config.ridge.max_alt_iters);
      maybe(r, "tol_alt", config.ridge.tol_alt);
    }
    if (j.contains("tracker")) {
      const json& t = j.at("tracker");
      if (t.contains("lambda")) config.tracker.lambda = parse_lambda(t.at("lambda"));
      maybe(t, "beta", config.tracker.beta);
      maybe(t, "max_inner_iters", config.tracker.max_inner_iters);
      maybe(t, "tol_inner", config.tracker.tol_inner);
      if (t.contains("step_rule"))
        config.tracker.step_rule = parse_step_rule(t.at("step_rule"));
      if (t.contains("state_criterion"))
        config.tracker.state_criterion = parse_criterion(t.at("state_criterion"));
    }
    if (j.contains("clustering")) {
      const json& c = j.at("clustering");
      maybe(c, "n_states", config.clustering.n_states);
      maybe(c, "t_cluster", config.clustering.t_cluster);
    }
    if (j.contains("sweep")) {
      SweepConfig sweep;
      sweep.parameter = j.at("sweep").at("parameter");
      sweep.values = j.at("sweep").at("values").get<std::vector<double>>();
      config.sweep = sweep;
    }
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("config field error: ") + e.what());
  }
  if (config.tracker.lambda.empty()) config.tracker.lambda = {0.95};
  return config;
}

OutputLock::OutputLock(const std::string& dir) {
  fs::create_directories(dir);
  path_ = (fs::path(dir) / ".lock").string();
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0)
    throw InvalidInputError("output directory is locked by another writer: " + dir);
  ::close(fd);
}

OutputLock::~OutputLock() { ::unlink(path_.c_str()); }

std::string cmd_generate(const ExperimentConfig& config) {
  GenerationConfig gen = config.generation;
  gen.rng_seed = config.rng_seed;
  gen.validate();

  OutputLock lock(config.output_dir);
  RunLogger log(config.output_dir, config.debug_log);
  log.info("generating " + std::to_string(gen.n_intervals) + " intervals, N=" +
           std::to_string(gen.n_nodes) + " C=" + std::to_string(gen.n_cascades) +
           " S=" + std::to_string(gen.n_states));

  const int power = kronecker_power_for(gen.n_nodes, 4);
  Dataset dataset;
  dataset.states = random_state_set(gen, standard_kronecker_seeds(), power);
  dataset.x = random_susceptibility(gen.n_nodes, gen.n_cascades,
                                    substream_seed(gen.rng_seed, 1));
  std::vector<double> probs = gen.state_probabilities;
  if (probs.empty()) probs.assign(gen.n_states, 1.0 / gen.n_states);
  dataset.sigma = gen.switch_mode == SwitchMode::piecewise
                      ? piecewise_switch_sequence(gen.n_intervals)
                      : random_switch_sequence(gen.n_intervals, probs,
                                               substream_seed(gen.rng_seed, 2));
  dataset.snapshots = generate_cascades(dataset.states, dataset.x, dataset.sigma,
                                        gen.noise_std, substream_seed(gen.rng_seed, 3));
  dataset.manifest.n = gen.n_nodes;
  dataset.manifest.c = gen.n_cascades;
  dataset.manifest.t = gen.n_intervals;
  dataset.manifest.s = gen.n_states;
  dataset.manifest.rng_seed = gen.rng_seed;
  write_dataset(config.output_dir, dataset);
  log.event("generated", {{"n", gen.n_nodes},
                          {"c", gen.n_cascades},
                          {"t", gen.n_intervals},
                          {"s", gen.n_states},
                          {"rng_seed", gen.rng_seed}});
  log.info("dataset written to " + config.output_dir);
  return (fs::path(config.output_dir) / "manifest.json").string();
}

TrackOutputs cmd_track(const std::string& manifest_path, const ExperimentConfig& config) {
  config.validate();
  const Dataset dataset = read_dataset(manifest_path);
  const int n_states = config.clustering.n_states;

  OutputLock lock(config.output_dir);
  RunLogger log(config.output_dir, config.debug_log);

  TrackerConfig tracker_config = config.tracker;
  tracker_config.lambda = broadcast_lambda(config.tracker.lambda, n_states);

  RidgeConfig ridge = config.ridge;
  ridge.t_init = std::min<int>(ridge.t_init, static_cast<int>(dataset.snapshots.size()));
  log.info("batch initialization over first " + std::to_string(ridge.t_init) +
           " intervals");
  std::vector<StatePair> init_states =
      batch_initialize(dataset.snapshots, dataset.x, n_states, ridge,
                       substream_seed(config.rng_seed, 11));

  const bool has_truth = !dataset.states.empty() &&
                         dataset.sigma.T() == static_cast<int>(dataset.snapshots.size());
  std::vector<double> error_curve;
  auto snapshot_cb = [&](int t, const std::vector<StatePair>& states) {
    double err = std::numeric_limits<double>::quiet_NaN();
    if (has_truth) {
      err = best_match_error(dataset.states[dataset.sigma.sigma[t - 1] - 1], states);
      error_curve.push_back(err);
    }
    if (t % 100 == 0) log.info("interval " + std::to_string(t) + " done");
    log.event("interval", {{"t", t}, {"best_match_error", err}});
  };

  TrackOutputs outputs;
  outputs.initial_states = init_states;
  outputs.result = track(dataset.snapshots, dataset.x, std::move(init_states),
                         tracker_config, snapshot_cb);
  outputs.results_dir = config.output_dir;

  write_int_csv((fs::path(config.output_dir) / "sigma_est.csv").string(),
                outputs.result.sigma.sigma);
  {
    Vector residuals = Eigen::Map<const Vector>(outputs.result.residuals.data(),
                                                outputs.result.residuals.size());
    write_vector_csv((fs::path(config.output_dir) / "residuals.csv").string(), residuals);
  }
  write_states(config.output_dir, outputs.result.final_states);
  if (has_truth) write_error_curve(config.output_dir, error_curve);

  write_metrics_json(config.output_dir,
                     {{"command", "track"},
                      {"n_intervals", dataset.snapshots.size()},
                      {"n_states", n_states},
                      {"t_init", ridge.t_init},
                      {"rng_seed", config.rng_seed},
                      {"skipped_intervals", outputs.result.skipped_intervals},
                      {"final_best_match_error",
                       has_truth && !error_curve.empty() ? error_curve.back() : -1.0}});
  log.info("tracking finished; results in " + config.output_dir);
  return outputs;
}

ClusterIdentifyOutputs cmd_cluster_identify(const std::string& manifest_path,
                                            const ExperimentConfig& config) {
  config.validate();
  const Dataset dataset = read_dataset(manifest_path);
  const int T = static_cast<int>(dataset.snapshots.size());
  const int t_cluster = config.clustering.t_cluster > 0
                            ? std::min(config.clustering.t_cluster, T)
                            : T;

  OutputLock lock(config.output_dir);
  RunLogger log(config.output_dir, config.debug_log);
  log.info("clustering identification: S=" + std::to_string(config.clustering.n_states) +
           ", clustering phase t<=" + std::to_string(t_cluster));

  ClusterIdentifyOutputs outputs;
  outputs.result = cluster_identify(dataset.snapshots, dataset.x,
                                    config.clustering.n_states, t_cluster,
                                    substream_seed(config.rng_seed, 21));
  outputs.results_dir = config.output_dir;

  write_int_csv((fs::path(config.output_dir) / "sigma_est.csv").string(),
                outputs.result.sigma.sigma);
  write_states(config.output_dir, outputs.result.states);
  write_metrics_json(config.output_dir,
                     {{"command", "cluster_identify"},
                      {"n_intervals", T},
                      {"n_states", config.clustering.n_states},
                      {"t_cluster", t_cluster},
                      {"rng_seed", config.rng_seed},
                      {"failed_intervals", outputs.result.failed_intervals},
                      {"inertia", outputs.result.model.inertia}});
  log.info("identification finished; results in " + config.output_dir);
  return outputs;
}

EvaluationReport cmd_evaluate(const std::string& results_dir,
                              const std::string& truth_manifest_path,
                              const std::string& out_dir) {
  const Dataset truth = read_dataset(truth_manifest_path);
  if (truth.states.empty() || truth.sigma.T() == 0)
    throw DataError("evaluation requires a manifest with ground-truth states and sigma");
  const int n_states = static_cast<int>(truth.states.size());

  SwitchSequence sigma_est;
  sigma_est.sigma = read_int_csv((fs::path(results_dir) / "sigma_est.csv").string());
  if (sigma_est.T() != truth.sigma.T())
    throw DataError("sigma_est length does not match the truth manifest");
  const std::vector<StatePair> est_states = read_states(results_dir, n_states);

  EvaluationReport report;
  report.label_permutation = best_label_permutation(truth.sigma, sigma_est, n_states);
  report.state_accuracy_overall = state_accuracy(truth.sigma, sigma_est, n_states);

  const int T = truth.sigma.T();
  const int tail_start = std::max(0, T - 100);
  SwitchSequence tail_true, tail_est;
  tail_true.sigma.assign(truth.sigma.sigma.begin() + tail_start, truth.sigma.sigma.end());
  tail_est.sigma.assign(sigma_est.sigma.begin() + tail_start, sigma_est.sigma.end());
  int tail_hits = 0;
  for (int t = 0; t < tail_true.T(); ++t)
    if (report.label_permutation[tail_est.sigma[t] - 1] == tail_true.sigma[t]) ++tail_hits;
  report.state_accuracy_tail = static_cast<double>(tail_hits) / tail_true.T();

  report.relative_errors.assign(n_states, 0.0);
  report.support.assign(n_states, SupportScore{});
  for (int s = 0; s < n_states; ++s) {
    const int truth_label = report.label_permutation[s];
    report.relative_errors[truth_label - 1] =
        relative_error(truth.states[truth_label - 1], est_states[s]);
    report.support[truth_label - 1] =
        support_f1(truth.states[truth_label - 1].a, est_states[s].a, 1e-4);
  }

  fs::create_directories(out_dir);
  json per_state = json::array();
  for (int s = 0; s < n_states; ++s)
    per_state.push_back({{"state", s + 1},
                         {"relative_error", report.relative_errors[s]},
                         {"support_precision", report.support[s].precision},
                         {"support_recall", report.support[s].recall},
                         {"support_f1", report.support[s].f1}});
  write_metrics_json(out_dir, {{"command", "evaluate"},
                               {"state_accuracy", report.state_accuracy_overall},
                               {"state_accuracy_tail", report.state_accuracy_tail},
                               {"label_permutation", report.label_permutation},
                               {"per_state", per_state}});
  return report;
}

std::vector<SweepRow> cmd_sweep(const std::string& manifest_path,
                                const ExperimentConfig& config) {
  config.validate();
  if (!config.sweep) throw InvalidInputError("sweep command requires a sweep config block");
  const Dataset dataset = read_dataset(manifest_path);
  const int T = static_cast<int>(dataset.snapshots.size());

  OutputLock lock(config.output_dir);
  RunLogger log(config.output_dir, config.debug_log);
  std::vector<SweepRow> rows;

  if (config.sweep->parameter == "S") {
    const int t_cluster = config.clustering.t_cluster > 0
                              ? std::min(config.clustering.t_cluster, T)
                              : T;
    // Per-interval parameter vectors: exact closed form when the cascade count
    // permits it, ridge estimates otherwise.
    std::vector<Vector> thetas;
    if (dataset.x.rows() <= dataset.x.cols()) {
      const Matrix x_pinv = pinv_full_row_rank(dataset.x);
      for (int t = 0; t < t_cluster; ++t) {
        try {
          thetas.push_back(
              vectorize_theta(closed_form_pair(dataset.snapshots[t].y, dataset.x, x_pinv))
                  .theta);
        } catch (const NumericalError&) {
        }
      }
    } else {
      thetas = ridge_thetas(dataset.snapshots, dataset.x, t_cluster, config.ridge);
    }
    if (thetas.empty()) throw NumericalError("sweep: no usable intervals");
    for (double value : config.sweep->values) {
      const int k = static_cast<int>(std::lround(value));
      const ClusterModel model =
          kmeans(thetas, k, substream_seed(config.rng_seed, 31 + k), 300, 5);
      SweepRow row;
      row.value = value;
      row.dispersion = intra_cluster_dispersion(thetas, model.centroids, model.assignments);
      rows.push_back(row);
      log.info("S=" + std::to_string(k) + " dispersion=" + format_double(row.dispersion));
      log.event("sweep_point", {{"S", k}, {"dispersion", row.dispersion}});
    }
  } else {  // lambda
    const int n_states = config.clustering.n_states;
    RidgeConfig ridge = config.ridge;
    ridge.t_init = std::min<int>(ridge.t_init, T);
    const std::vector<StatePair> init_states =
        batch_initialize(dataset.snapshots, dataset.x, n_states, ridge,
                         substream_seed(config.rng_seed, 11));
    for (double value : config.sweep->values) {
      TrackerConfig tracker_config = config.tracker;
      tracker_config.lambda.assign(n_states, value);
      const TrackResult result =
          track(dataset.snapshots, dataset.x, init_states, tracker_config);
      SweepRow row;
      row.value = value;
      double path_sum = 0.0, neighbor_sum = 0.0;
      for (const StatePair& state : result.final_states) {
        const GraphStats stats = graph_stats(state.a, 1e-4);
        path_sum += stats.avg_shortest_path_length;
        neighbor_sum += stats.avg_num_neighbors;
        row.diameter = std::max(row.diameter, stats.diameter);
      }
      row.avg_path_length = path_sum / n_states;
      row.avg_num_neighbors = neighbor_sum / n_states;
      rows.push_back(row);
      log.info("lambda=" + format_double(value) +
               " avg_path=" + format_double(row.avg_path_length) +
               " avg_neighbors=" + format_double(row.avg_num_neighbors));
      log.event("sweep_point", {{"lambda", value},
                                {"avg_path_length", row.avg_path_length},
                                {"avg_num_neighbors", row.avg_num_neighbors},
                                {"diameter", row.diameter}});
    }
  }

  std::ofstream out((fs::path(config.output_dir) / "sweep.csv").string());
  out << "value,dispersion,avg_path_length,avg_num_neighbors,diameter\n";
  for (const SweepRow& row : rows)
    out << format_double(row.value) << "," << format_double(row.dispersion) << ","
        << format_double(row.avg_path_length) << ","
        << format_double(row.avg_num_neighbors) << "," << row.diameter << "\n";
  return rows;
}

IdentifiabilityReport cmd_identifiability(const std::string& matrix_path,
                                          int k_sparsity, const std::string& out_path) {
  const Matrix x = read_matrix_csv(matrix_path);
  IdentifiabilityReport report = check_prop2(x, k_sparsity);
  const IdentifiabilityReport p1 = check_prop1(x);
  report.prop1_ok = p1.prop1_ok;
  report.rank_x = p1.rank_x;
  if (!out_path.empty()) {
    json j = {{"schema_version", 1},
              {"n", report.n},
              {"c", report.c},
              {"k_sparsity", report.k_sparsity},
              {"rank_x", report.rank_x},
              {"kruskal_rank_xt", report.kruskal_rank_xt},
              {"prop1_ok", report.prop1_ok},
              {"prop2_ok", report.prop2_ok}};
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
  }
  return report;
}

std::string cmd_preprocess(const std::string& events_path, const PreprocessConfig& pconfig,
                           const std::string& out_dir) {
  OutputLock lock(out_dir);
  const std::vector<CascadeEvent> events = load_events(events_path);
  const FilteredEvents filtered = filter_memes(events, pconfig.min_infected);
  if (filtered.n_nodes == 0)
    throw DataError("no cascades survive the min_infected filter");

  Dataset dataset;
  dataset.snapshots =
      build_snapshots(filtered, pconfig.n_intervals, pconfig.interval_minimum);
  if (pconfig.n_categories > 0) {
    dataset.x = build_susceptibility(filtered, pconfig.category_map, pconfig.n_categories);
  } else {
    // Without category labels every cascade falls in one bucket, so the
    // susceptibility matrix degenerates to all ones.
    dataset.x = Matrix::Ones(filtered.n_nodes, filtered.n_cascades);
  }
  dataset.manifest.n = filtered.n_nodes;
  dataset.manifest.c = filtered.n_cascades;
  dataset.manifest.t = pconfig.n_intervals;
  dataset.manifest.s = 0;
  write_dataset(out_dir, dataset);
  write_id_maps(out_dir, filtered);
  return (fs::path(out_dir) / "manifest.json").string();
}

}  // namespace switchtrack
