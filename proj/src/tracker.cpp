#include "switchtrack/tracker.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "switchtrack/io.hpp"
#include "switchtrack/sem.hpp"

namespace switchtrack {

void TrackerConfig::validate(int n_states) const {
  if (static_cast<int>(lambda.size()) != n_states)
    throw InvalidInputError("tracker config: lambda length != S");
  for (double l : lambda)
    if (l < 0.0) throw InvalidInputError("tracker config: lambda_s must be >= 0");
  if (beta <= 0.0 || beta > 1.0)
    throw InvalidInputError("tracker config: beta must lie in (0,1]");
  if (max_inner_iters < 1 || tol_inner <= 0.0)
    throw InvalidInputError("tracker config: bad inner-loop limits");
}

TrackerStats TrackerStats::zero(int n_states, int n, int c) {
  TrackerStats stats;
  stats.per_state.resize(n_states);
  for (StateStats& s : stats.per_state) {
    s.omega = Matrix::Zero(n, n);
    s.ybar = Matrix::Zero(n, c);
    s.alpha = 0.0;
  }
  return stats;
}

double soft_threshold(double v, double mu) {
  if (mu < 0.0) throw InvalidInputError("soft_threshold: mu must be >= 0");
  const double mag = std::abs(v) - mu;
  return mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
}

Matrix soft_threshold(const Matrix& m, double mu) {
  if (mu < 0.0) throw InvalidInputError("soft_threshold: mu must be >= 0");
  return m.unaryExpr([mu](double v) {
    const double mag = std::abs(v) - mu;
    return mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
  });
}

int estimate_state_apriori(const Matrix& y, const std::vector<StatePair>& states,
                           const Matrix& x) {
  if (states.empty()) throw InvalidInputError("estimate_state_apriori: no states");
  int best = 1;
  double best_r = std::numeric_limits<double>::infinity();
  for (int s = 0; s < static_cast<int>(states.size()); ++s) {
    const double r = sem_residual(y, x, states[s]);
    if (r < best_r) {
      best_r = r;
      best = s + 1;
    }
  }
  return best;
}

void update_stats(TrackerStats& stats, const Matrix& y, int s_hat, double beta) {
  if (s_hat < 1 || s_hat > static_cast<int>(stats.per_state.size()))
    throw InvalidInputError("update_stats: state index out of range");
  if (beta < 1.0) {
    // P2 down-weighs every past residual, so all states decay each interval.
    for (StateStats& s : stats.per_state) {
      s.omega *= beta;
      s.ybar *= beta;
      s.alpha *= beta;
    }
  }
  StateStats& w = stats.per_state[s_hat - 1];
  w.omega.noalias() += y * y.transpose();
  w.ybar += y;
  w.alpha += 1.0;
}

namespace {

Matrix drop_row_col(const Matrix& m, int i) {
  const auto n = m.rows();
  Matrix out(n - 1, n - 1);
  out.topLeftCorner(i, i) = m.topLeftCorner(i, i);
  out.topRightCorner(i, n - 1 - i) = m.topRightCorner(i, n - 1 - i);
  out.bottomLeftCorner(n - 1 - i, i) = m.bottomLeftCorner(n - 1 - i, i);
  out.bottomRightCorner(n - 1 - i, n - 1 - i) = m.bottomRightCorner(n - 1 - i, n - 1 - i);
  return out;
}

Vector drop_entry(const Vector& v, int i) {
  Vector out(v.size() - 1);
  out.head(i) = v.head(i);
  out.tail(v.size() - 1 - i) = v.tail(v.size() - 1 - i);
  return out;
}

}  // namespace

void ista_gradients(const StatePair& pair, const StateStats& stats,
                    const Matrix& x, int i, Vector& grad_a, double& grad_b) {
  const int n = pair.n();
  if (i < 0 || i >= n) throw InvalidInputError("ista_gradients: node index out of range");
  const Vector xi = x.row(i).transpose();
  const Vector v = stats.ybar * xi;             // Ybar x_i
  const Vector a_pad = pair.a.row(i).transpose();  // zero at entry i
  const Vector g_full = stats.omega * a_pad + pair.b(i) * v - stats.omega.col(i);
  grad_a = drop_entry(g_full, i);
  grad_b = a_pad.dot(v) + stats.alpha * pair.b(i) * xi.squaredNorm() - v(i);
}

double smooth_objective(const StatePair& pair, const StateStats& stats,
                        const Matrix& x) {
  const int n = pair.n();
  double f = 0.0;
  const Matrix v = stats.ybar * x.transpose();  // column i = Ybar x_i
  for (int i = 0; i < n; ++i) {
    const Vector a_pad = pair.a.row(i).transpose();
    const Vector oa = stats.omega * a_pad;
    f += 0.5 * a_pad.dot(oa) - a_pad.dot(stats.omega.col(i)) +
         pair.b(i) * a_pad.dot(v.col(i)) +
         0.5 * stats.alpha * pair.b(i) * pair.b(i) * x.row(i).squaredNorm() -
         pair.b(i) * v(i, i) + 0.5 * stats.omega(i, i);
  }
  return f;
}

double p1_objective(const StatePair& pair, const StateStats& stats,
                    const Matrix& x, double lambda_s) {
  return smooth_objective(pair, stats, x) + lambda_s * pair.a.cwiseAbs().sum();
}

double lipschitz_bound(const StateStats& stats, const Matrix& x, int i) {
  const auto n = stats.omega.rows();
  Matrix q(n, n);
  q.topLeftCorner(n - 1, n - 1) = drop_row_col(stats.omega, i);
  const Vector u = drop_entry(stats.ybar * x.row(i).transpose(), i);
  q.topRightCorner(n - 1, 1) = u;
  q.bottomLeftCorner(1, n - 1) = u.transpose();
  q(n - 1, n - 1) = stats.alpha * x.row(i).squaredNorm();

  if (q.cwiseAbs().maxCoeff() == 0.0) return 1e-12;
  Vector v = Vector::Ones(n);
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = q * v;
    const double norm = w.norm();
    if (norm == 0.0) return 1e-12;
    w /= norm;
    if (it > 1 && std::abs(norm - lambda) <= 1e-6 * std::max(1.0, norm)) {
      lambda = norm;
      break;
    }
    lambda = norm;
    v = std::move(w);
  }
  return std::max(lambda, 1e-12);
}

double lipschitz_bound(const StateStats& stats, const Matrix& x) {
  const int n = static_cast<int>(stats.omega.rows());
  double lmax = 1e-12;
#pragma omp parallel for reduction(max : lmax) schedule(dynamic)
  for (int i = 0; i < n; ++i) lmax = std::max(lmax, lipschitz_bound(stats, x, i));
  return lmax;
}

namespace {

struct IterScratch {
  Matrix v;       // Ybar X^T, column i = Ybar x_i
  Vector xs;      // ||x_i||^2 per node
};

// One full prox-gradient sweep over all nodes at step 1/L. Returns the
// candidate pair; the gradient matrix G = Omega A^T is recomputed inside.
StatePair pg_sweep(const StatePair& cur, const StateStats& stats, const Matrix& x,
                   const IterScratch& sc, double lambda_s, double lipschitz) {
  const int n = cur.n();
  StatePair next = cur;
  const Matrix g = stats.omega * cur.a.transpose();  // column i = Omega a_pad(i)
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const Vector grad_full =
        g.col(i) + cur.b(i) * sc.v.col(i) - stats.omega.col(i);
    const double grad_b = cur.a.row(i).dot(sc.v.col(i)) +
                          stats.alpha * cur.b(i) * sc.xs(i) - sc.v(i, i);
    Vector z = cur.a.row(i).transpose() - grad_full / lipschitz;
    const double thr = lambda_s / lipschitz;
    for (int j = 0; j < n; ++j) {
      const double mag = std::abs(z(j)) - thr;
      next.a(i, j) = mag > 0.0 ? (z(j) > 0.0 ? mag : -mag) : 0.0;
    }
    next.a(i, i) = 0.0;  // zero padding keeps the diagonal hollow
    next.b(i) = cur.b(i) - grad_b / lipschitz;
  }
  return next;
}

double param_distance_sq(const StatePair& a, const StatePair& b) {
  return (a.a - b.a).squaredNorm() + (a.b - b.b).squaredNorm();
}

// <grad f(cur), next - cur> evaluated from the same quantities as pg_sweep.
double gradient_inner_product(const StatePair& cur, const StatePair& next,
                              const StateStats& stats, const Matrix& x,
                              const IterScratch& sc) {
  const int n = cur.n();
  const Matrix g = stats.omega * cur.a.transpose();
  double ip = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector grad_full = g.col(i) + cur.b(i) * sc.v.col(i) - stats.omega.col(i);
    Vector da = (next.a.row(i) - cur.a.row(i)).transpose();
    da(i) = 0.0;
    ip += grad_full.dot(da);
    const double grad_b = cur.a.row(i).dot(sc.v.col(i)) +
                          stats.alpha * cur.b(i) * sc.xs(i) - sc.v(i, i);
    ip += grad_b * (next.b(i) - cur.b(i));
  }
  return ip;
}

}  // namespace

StatePair ista_inner_solve(const StatePair& start, const StateStats& stats,
                           const Matrix& x, const IstaOptions& opts) {
  if (stats.alpha <= 0.0)
    throw InvalidInputError("ista_inner_solve: state has no accumulated data");
  const int n = start.n();

  IterScratch sc;
  sc.v = stats.ybar * x.transpose();
  sc.xs.resize(n);
  for (int i = 0; i < n; ++i) sc.xs(i) = x.row(i).squaredNorm();

  double lipschitz;
  if (opts.step_rule == StepRule::exact_lipschitz) {
    lipschitz = lipschitz_bound(stats, x);
  } else {
    lipschitz = (opts.lipschitz_state && *opts.lipschitz_state > 0.0)
                    ? *opts.lipschitz_state
                    : std::max(stats.omega.trace() + stats.alpha * sc.xs.maxCoeff(), 1e-12);
  }

  StatePair cur = start;
  for (int k = 0; k < opts.max_inner_iters; ++k) {
    StatePair next;
    if (opts.step_rule == StepRule::backtracking) {
      const double f_cur = smooth_objective(cur, stats, x);
      for (;;) {
        next = pg_sweep(cur, stats, x, sc, opts.lambda_s, lipschitz);
        const double f_next = smooth_objective(next, stats, x);
        const double dist_sq = param_distance_sq(next, cur);
        const double bound = f_cur + gradient_inner_product(cur, next, stats, x, sc) +
                             0.5 * lipschitz * dist_sq;
        if (f_next <= bound + 1e-12 * std::max(1.0, std::abs(bound))) break;
        lipschitz *= 2.0;
        if (lipschitz > 1e300)
          throw DivergenceError("ista_inner_solve: backtracking failed to find a step");
      }
      if (opts.lipschitz_state) *opts.lipschitz_state = lipschitz;
      // grow the step for the next iteration
      lipschitz = std::max(lipschitz / 2.0, 1e-12);
    } else {
      next = pg_sweep(cur, stats, x, sc, opts.lambda_s, lipschitz);
    }

    if (!next.a.allFinite() || !next.b.allFinite())
      throw DivergenceError("ista_inner_solve: non-finite iterate");

    const double change = std::sqrt(param_distance_sq(next, cur));
    const double scale = std::sqrt(next.a.squaredNorm() + next.b.squaredNorm());
    cur = std::move(next);
    if (change <= opts.tol_inner * std::max(1.0, scale)) break;
  }
  cur.state_id = start.state_id;
  return cur;
}

TopologyTracker::TopologyTracker(std::vector<StatePair> initial_states, Matrix x,
                                 TrackerConfig config)
    : states_(std::move(initial_states)), x_(std::move(x)), config_(std::move(config)) {
  if (states_.empty()) throw InvalidInputError("tracker: no initial states");
  config_.validate(static_cast<int>(states_.size()));
  const int n = states_[0].n();
  for (const StatePair& s : states_)
    if (s.a.rows() != n || s.b.size() != n)
      throw InvalidInputError("tracker: inconsistent state dimensions");
  if (x_.rows() != n) throw InvalidInputError("tracker: X row count != N");
  stats_ = TrackerStats::zero(static_cast<int>(states_.size()), n,
                              static_cast<int>(x_.cols()));
  lipschitz_.assign(states_.size(), 0.0);
}

int TopologyTracker::estimate_state_aposteriori(
    const Matrix& y, std::vector<StatePair>& candidates,
    std::vector<StateStats>& candidate_stats) const {
  const int n_states = static_cast<int>(states_.size());
  candidates.resize(n_states);
  candidate_stats.resize(n_states);
  int best = 1;
  double best_r = std::numeric_limits<double>::infinity();
  for (int s = 1; s <= n_states; ++s) {
    TrackerStats hypo = stats_;
    update_stats(hypo, y, s, config_.beta);
    candidate_stats[s - 1] = hypo.per_state[s - 1];
    IstaOptions opts;
    opts.lambda_s = config_.lambda[s - 1];
    opts.step_rule = config_.step_rule;
    opts.max_inner_iters = config_.max_inner_iters;
    opts.tol_inner = config_.tol_inner;
    candidates[s - 1] =
        ista_inner_solve(states_[s - 1], candidate_stats[s - 1], x_, opts);
    const double r = sem_residual(y, x_, candidates[s - 1]);
    if (r < best_r) {
      best_r = r;
      best = s;
    }
  }
  return best;
}

StepResult TopologyTracker::step(const CascadeSnapshot& snapshot) {
  const Matrix& y = snapshot.y;
  ++t_;

  StepResult result;
  if (config_.state_criterion == StateCriterion::aposteriori) {
    std::vector<StatePair> candidates;
    std::vector<StateStats> candidate_stats;
    const int s = estimate_state_aposteriori(y, candidates, candidate_stats);
    result.sigma_hat = s;
    result.residual = sem_residual(y, x_, states_[s - 1]);
    update_stats(stats_, y, s, config_.beta);
    stats_.per_state[s - 1] = std::move(candidate_stats[s - 1]);
    states_[s - 1] = std::move(candidates[s - 1]);
    states_[s - 1].state_id = s;
    return result;
  }

  const int s = estimate_state_apriori(y, states_, x_);
  result.sigma_hat = s;
  result.residual = sem_residual(y, x_, states_[s - 1]);

  // Stage the stats update so a diverging inner solve leaves the tracker at
  // its previous iterate (the interval is dropped as a whole).
  TrackerStats staged = stats_;
  update_stats(staged, y, s, config_.beta);
  IstaOptions opts;
  opts.lambda_s = config_.lambda[s - 1];
  opts.step_rule = config_.step_rule;
  opts.max_inner_iters = config_.max_inner_iters;
  opts.tol_inner = config_.tol_inner;
  double lip = lipschitz_[s - 1];
  opts.lipschitz_state = &lip;
  StatePair solved = ista_inner_solve(states_[s - 1], staged.per_state[s - 1], x_, opts);
  stats_ = std::move(staged);
  lipschitz_[s - 1] = lip;
  states_[s - 1] = std::move(solved);
  states_[s - 1].state_id = s;
  return result;
}

void TopologyTracker::save_checkpoint(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const int n_states = static_cast<int>(states_.size());
  nlohmann::json j;
  j["format_version"] = 1;
  j["t"] = t_;
  j["n_states"] = n_states;
  j["lambda"] = config_.lambda;
  j["beta"] = config_.beta;
  j["max_inner_iters"] = config_.max_inner_iters;
  j["tol_inner"] = config_.tol_inner;
  j["step_rule"] =
      config_.step_rule == StepRule::backtracking ? "backtracking" : "exact_lipschitz";
  j["state_criterion"] =
      config_.state_criterion == StateCriterion::apriori ? "apriori" : "aposteriori";
  j["lipschitz"] = lipschitz_;
  std::vector<double> alphas;
  for (const StateStats& s : stats_.per_state) alphas.push_back(s.alpha);
  j["alpha"] = alphas;

  write_matrix_csv((fs::path(dir) / "X.csv").string(), x_);
  for (int s = 0; s < n_states; ++s) {
    const std::string tag = std::to_string(s + 1);
    write_matrix_csv((fs::path(dir) / ("state_" + tag + "_a.csv")).string(),
                     states_[s].a);
    write_vector_csv((fs::path(dir) / ("state_" + tag + "_b.csv")).string(),
                     states_[s].b);
    write_matrix_csv((fs::path(dir) / ("stats_" + tag + "_omega.csv")).string(),
                     stats_.per_state[s].omega);
    write_matrix_csv((fs::path(dir) / ("stats_" + tag + "_ybar.csv")).string(),
                     stats_.per_state[s].ybar);
  }
  std::ofstream out(fs::path(dir) / "checkpoint.json");
  if (!out) throw DataError("cannot write checkpoint in " + dir);
  out << j.dump(2) << '\n';
}

TopologyTracker TopologyTracker::load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "checkpoint.json");
  if (!in) throw DataError("cannot open checkpoint in " + dir);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint.json: ") + e.what());
  }
  const int n_states = j.at("n_states");

  TrackerConfig config;
  config.lambda = j.at("lambda").get<std::vector<double>>();
  config.beta = j.at("beta");
  config.max_inner_iters = j.at("max_inner_iters");
  config.tol_inner = j.at("tol_inner");
  config.step_rule = j.at("step_rule") == "backtracking" ? StepRule::backtracking
                                                         : StepRule::exact_lipschitz;
  config.state_criterion = j.at("state_criterion") == "apriori"
                               ? StateCriterion::apriori
                               : StateCriterion::aposteriori;

  Matrix x = read_matrix_csv((fs::path(dir) / "X.csv").string());
  std::vector<StatePair> states(n_states);
  for (int s = 0; s < n_states; ++s) {
    const std::string tag = std::to_string(s + 1);
    states[s].a = read_matrix_csv((fs::path(dir) / ("state_" + tag + "_a.csv")).string());
    states[s].b = read_vector_csv((fs::path(dir) / ("state_" + tag + "_b.csv")).string());
    states[s].state_id = s + 1;
  }
  TopologyTracker tracker(std::move(states), std::move(x), std::move(config));
  const std::vector<double> alphas = j.at("alpha").get<std::vector<double>>();
  for (int s = 0; s < n_states; ++s) {
    const std::string tag = std::to_string(s + 1);
    tracker.stats_.per_state[s].omega =
        read_matrix_csv((fs::path(dir) / ("stats_" + tag + "_omega.csv")).string());
    tracker.stats_.per_state[s].ybar =
        read_matrix_csv((fs::path(dir) / ("stats_" + tag + "_ybar.csv")).string());
    tracker.stats_.per_state[s].alpha = alphas[s];
  }
  tracker.lipschitz_ = j.at("lipschitz").get<std::vector<double>>();
  tracker.t_ = j.at("t");
  return tracker;
}

TrackResult track(const std::vector<CascadeSnapshot>& snapshots, const Matrix& x,
                  std::vector<StatePair> initial_states, const TrackerConfig& config,
                  const std::function<void(int, const std::vector<StatePair>&)>&
                      snapshot_cb) {
  TopologyTracker tracker(std::move(initial_states), x, config);
  TrackResult result;
  result.sigma.sigma.reserve(snapshots.size());
  result.residuals.reserve(snapshots.size());
  int t = 0;
  for (const CascadeSnapshot& snap : snapshots) {
    ++t;
    try {
      const StepResult step = tracker.step(snap);
      result.sigma.sigma.push_back(step.sigma_hat);
      result.residuals.push_back(step.residual);
    } catch (const NumericalError&) {
      result.skipped_intervals.push_back(t);
      result.sigma.sigma.push_back(
          estimate_state_apriori(snap.y, tracker.states(), x));
      result.residuals.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    if (snapshot_cb) snapshot_cb(t, tracker.states());
  }
  result.final_states = tracker.states();
  return result;
}

}  // namespace switchtrack
