#pragma once

#include <functional>
#include <string>
#include <vector>

#include "switchtrack/types.hpp"

namespace switchtrack {

enum class StepRule { exact_lipschitz, backtracking };
enum class StateCriterion { apriori, aposteriori };

struct TrackerConfig {
  std::vector<double> lambda;  // l1 weight per state, >= 0
  double beta = 1.0;           // forgetting factor in (0, 1]
  int max_inner_iters = 5;
  double tol_inner = 1e-6;
  StepRule step_rule = StepRule::backtracking;
  StateCriterion state_criterion = StateCriterion::apriori;

  void validate(int n_states) const;
};

/// Exponentially weighted sufficient statistics for one state:
///   omega = sum_tau beta^{t-tau} chi_tau Y_tau Y_tau^T
///   ybar  = sum_tau beta^{t-tau} chi_tau Y_tau
///   alpha = sum_tau beta^{t-tau} chi_tau
/// The trimmed views (row/column i deleted) are taken where needed.
struct StateStats {
  Matrix omega;
  Matrix ybar;
  double alpha = 0.0;
};

struct TrackerStats {
  std::vector<StateStats> per_state;

  static TrackerStats zero(int n_states, int n, int c);
};

/// Entrywise sign(m) * max(|m| - mu, 0).
Matrix soft_threshold(const Matrix& m, double mu);
double soft_threshold(double v, double mu);

/// argmin_s || Y - A^s Y - B^s X ||_F; ties go to the smaller index. 1-based.
int estimate_state_apriori(const Matrix& y, const std::vector<StatePair>& states,
                           const Matrix& x);

/// Decay-and-accumulate update: the winning state receives the rank-one
/// update after decay; with beta < 1 every state's stats decay each interval.
void update_stats(TrackerStats& stats, const Matrix& y, int s_hat, double beta);

/// Gradients of the exponentially weighted LS loss for node i (0-based):
///   grad_a = Omega_{-i} a_{-i} + Ybar_{-i} x_i b_ii - omega_{-i}
///   grad_b = a_{-i}^T Ybar_{-i} x_i + alpha b_ii ||x_i||^2 - ybar_i^T x_i
void ista_gradients(const StatePair& pair, const StateStats& stats,
                    const Matrix& x, int i, Vector& grad_a, double& grad_b);

/// The smooth part of the P1 objective evaluated from the sufficient
/// statistics (includes the data-dependent constant 1/2 sum ||y_i||^2).
double smooth_objective(const StatePair& pair, const StateStats& stats,
                        const Matrix& x);

/// Full P1 objective: smooth part + lambda ||A||_1.
double p1_objective(const StatePair& pair, const StateStats& stats,
                    const Matrix& x, double lambda_s);

/// Largest eigenvalue of the per-node quadratic-form matrix
/// [[Omega_{-i}, Ybar_{-i} x_i], [x_i^T Ybar_{-i}^T, alpha ||x_i||^2]],
/// by power iteration; floor 1e-12.
double lipschitz_bound(const StateStats& stats, const Matrix& x, int i);
double lipschitz_bound(const StateStats& stats, const Matrix& x);  // max over i

struct IstaOptions {
  double lambda_s = 0.0;
  StepRule step_rule = StepRule::exact_lipschitz;
  int max_inner_iters = 5;
  double tol_inner = 1e-6;
  double* lipschitz_state = nullptr;  // carried across calls for backtracking
};

/// Inner ISTA solve of P1 for one state: per-node parallel prox-gradient
/// steps, rows zero-padded back to hollow form. Requires stats.alpha > 0.
StatePair ista_inner_solve(const StatePair& start, const StateStats& stats,
                           const Matrix& x, const IstaOptions& opts);

struct StepResult {
  int sigma_hat = 0;
  double residual = 0.0;  // a priori residual of the chosen state
};

struct TrackResult {
  SwitchSequence sigma;
  std::vector<double> residuals;
  std::vector<StatePair> final_states;
  std::vector<int> skipped_intervals;  // 1-based t where the update failed
};

/// Streaming tracker: per snapshot, estimate the active state, update that
/// state's statistics, and run the inner solver for it only. Not safe for
/// concurrent mutation; per-node inner updates run in parallel internally.
class TopologyTracker {
 public:
  TopologyTracker(std::vector<StatePair> initial_states, Matrix x,
                  TrackerConfig config);

  StepResult step(const CascadeSnapshot& snapshot);

  const std::vector<StatePair>& states() const { return states_; }
  const TrackerStats& stats() const { return stats_; }
  const TrackerConfig& config() const { return config_; }
  const Matrix& exogenous() const { return x_; }
  int t() const { return t_; }

  /// Checkpoint: JSON manifest + CSV matrices, bit-reloadable.
  void save_checkpoint(const std::string& dir) const;
  static TopologyTracker load_checkpoint(const std::string& dir);

 private:
  int estimate_state_aposteriori(const Matrix& y, std::vector<StatePair>& candidates,
                                 std::vector<StateStats>& candidate_stats) const;

  std::vector<StatePair> states_;
  Matrix x_;
  TrackerConfig config_;
  TrackerStats stats_;
  std::vector<double> lipschitz_;  // last accepted L per state (backtracking)
  int t_ = 0;
};

/// Batch driver over a snapshot sequence. A per-interval numerical failure is
/// reported in skipped_intervals and the interval's update is dropped.
/// `snapshot_cb`, when set, receives (t, states) after each interval.
TrackResult track(const std::vector<CascadeSnapshot>& snapshots, const Matrix& x,
                  std::vector<StatePair> initial_states, const TrackerConfig& config,
                  const std::function<void(int, const std::vector<StatePair>&)>&
                      snapshot_cb = nullptr);

}  // namespace switchtrack
