#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "switchtrack/cascade_io.hpp"
#include "switchtrack/closed_form.hpp"
#include "switchtrack/identifiability.hpp"
#include "switchtrack/initializer.hpp"
#include "switchtrack/metrics.hpp"
#include "switchtrack/tracker.hpp"
#include "switchtrack/types.hpp"

namespace switchtrack {

enum class RunMode { stream, offline };

struct ClusteringConfig {
  int n_states = 4;
  int t_cluster = 0;  // 0 -> use all intervals for the clustering phase

  void validate() const;
};

struct SweepConfig {
  std::string parameter;  // "lambda" or "S"
  std::vector<double> values;
};

/// One experiment end to end: generation protocol, initializer, tracker, and
/// clustering settings, plus output plumbing. Loaded from a JSON file; every
/// field has a default so partial configs are valid.
struct ExperimentConfig {
  GenerationConfig generation;
  RidgeConfig ridge;
  TrackerConfig tracker;
  ClusteringConfig clustering;
  std::optional<SweepConfig> sweep;
  std::string output_dir = "out";
  std::uint64_t rng_seed = 0;
  RunMode mode = RunMode::stream;
  bool debug_log = false;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Exclusive lock on an output directory; refuses to start when another
/// writer holds it. Released on destruction.
class OutputLock {
 public:
  explicit OutputLock(const std::string& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

/// Generates a synthetic dataset under config.output_dir.
/// Returns the manifest path.
std::string cmd_generate(const ExperimentConfig& config);

struct TrackOutputs {
  TrackResult result;
  std::vector<StatePair> initial_states;
  std::string results_dir;
};

/// Batch-initializes, then tracks the manifest's snapshot stream. Writes
/// sigma_est.csv, residuals.csv, states/{A,B}_s.csv, metrics.json, and, when
/// ground truth is available, error_curve.csv (per-interval best-matching
/// relative error) under config.output_dir.
TrackOutputs cmd_track(const std::string& manifest_path, const ExperimentConfig& config);

struct ClusterIdentifyOutputs {
  IdentifyResult result;
  std::string results_dir;
};

/// Clustering-based identification over the manifest's snapshots; same output
/// layout as cmd_track.
ClusterIdentifyOutputs cmd_cluster_identify(const std::string& manifest_path,
                                            const ExperimentConfig& config);

struct EvaluationReport {
  double state_accuracy_overall = 0.0;
  double state_accuracy_tail = 0.0;  // last 100 intervals (or all when T < 100)
  std::vector<double> relative_errors;    // per truth state, labels aligned
  std::vector<SupportScore> support;      // per truth state, threshold 1e-4
  std::vector<int> label_permutation;     // est label s -> truth label
};

/// Compares a results directory against a ground-truth manifest; writes
/// metrics.json (and the aligned per-state table) under out_dir.
EvaluationReport cmd_evaluate(const std::string& results_dir,
                              const std::string& truth_manifest_path,
                              const std::string& out_dir);

struct SweepRow {
  double value = 0.0;
  double dispersion = 0.0;            // delta(S), "S" sweeps
  double avg_path_length = 0.0;       // "lambda" sweeps, mean over states
  double avg_num_neighbors = 0.0;
  int diameter = 0;                   // max over states
};

/// Model-order sweep (parameter "S": cluster dispersion elbow) or sparsity
/// sweep (parameter "lambda": small-world statistics of the tracked states).
/// Writes sweep.csv under config.output_dir.
std::vector<SweepRow> cmd_sweep(const std::string& manifest_path,
                                const ExperimentConfig& config);

/// Checks the recovery conditions for a susceptibility matrix stored as CSV;
/// writes the report JSON to out_path when nonempty.
IdentifiabilityReport cmd_identifiability(const std::string& matrix_path,
                                          int k_sparsity, const std::string& out_path);

/// Raw event log -> snapshots + susceptibility dataset under out_dir.
/// Returns the manifest path.
std::string cmd_preprocess(const std::string& events_path,
                           const PreprocessConfig& pconfig,
                           const std::string& out_dir);

}  // namespace switchtrack
