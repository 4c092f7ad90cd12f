#include "switchtrack/initializer.hpp"

#include <cmath>
#include <sstream>

#include "switchtrack/closed_form.hpp"
#include "switchtrack/kmeans.hpp"

namespace switchtrack {

void RidgeConfig::validate(int n_states) const {
  if (mu <= 0.0) throw InvalidInputError("ridge config: mu must be > 0");
  if (t_init < n_states)
    throw InvalidInputError("ridge config: t_init must be >= S");
  if (max_alt_iters < 1 || tol_alt <= 0.0)
    throw InvalidInputError("ridge config: bad alternation limits");
}

namespace {

Matrix drop_row(const Matrix& m, int i) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(i) = m.topRows(i);
  out.bottomRows(m.rows() - 1 - i) = m.bottomRows(m.rows() - 1 - i);
  return out;
}

}  // namespace

double ridge_node_objective(const Matrix& y, const Matrix& x, int i,
                            const Vector& a_minus_i, double b_ii, double mu) {
  const Matrix y_mi = drop_row(y, i);
  const Vector r = y.row(i).transpose() - y_mi.transpose() * a_minus_i -
                   b_ii * x.row(i).transpose();
  return 0.5 * r.squaredNorm() + mu * a_minus_i.squaredNorm();
}

StatePair ridge_pair(const Matrix& y, const Matrix& x, double mu,
                     int max_alt_iters, double tol_alt) {
  const int n = static_cast<int>(y.rows());
  if (x.rows() != n || x.cols() != y.cols())
    throw InvalidInputError("ridge_pair: dimension mismatch");
  if (mu <= 0.0) throw InvalidInputError("ridge_pair: mu must be > 0");
  for (int i = 0; i < n; ++i) {
    if (x.row(i).squaredNorm() <= 0.0) {
      std::ostringstream msg;
      msg << "ridge_pair: row " << i << " of X is zero";
      throw ZeroSusceptibilityError(msg.str());
    }
  }

  StatePair pair;
  pair.a = Matrix::Zero(n, n);
  pair.b = Vector::Zero(n);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const Vector xi = x.row(i).transpose();
    const double xi_sq = xi.squaredNorm();
    const Vector yi = y.row(i).transpose();
    const Matrix y_mi = drop_row(y, i);

    // The a-step system matrix is fixed across alternations.
    Eigen::LLT<Matrix> llt(y_mi * y_mi.transpose() +
                           2.0 * mu * Matrix::Identity(n - 1, n - 1));

    double b = yi.dot(xi) / xi_sq;  // LS fit ignoring A
    Vector a = Vector::Zero(n - 1);
    for (int it = 0; it < max_alt_iters; ++it) {
      const Vector a_prev = a;
      const double b_prev = b;
      a = llt.solve(y_mi * (yi - b * xi));
      // stationarity of the per-node objective in b
      b = (yi - y_mi.transpose() * a).dot(xi) / xi_sq;
      const double change = std::sqrt((a - a_prev).squaredNorm() +
                                      (b - b_prev) * (b - b_prev));
      const double scale = std::sqrt(a.squaredNorm() + b * b);
      if (change <= tol_alt * std::max(1.0, scale)) break;
    }

    for (int j = 0, col = 0; j < n; ++j) {
      if (j == i) continue;
      pair.a(i, j) = a(col++);
    }
    pair.b(i) = b;
  }
  return pair;
}

std::vector<Vector> ridge_thetas(const std::vector<CascadeSnapshot>& snapshots,
                                 const Matrix& x, int t_init,
                                 const RidgeConfig& config) {
  if (t_init < 1 || t_init > static_cast<int>(snapshots.size()))
    throw InvalidInputError("ridge_thetas: t_init must lie in 1..T");
  std::vector<Vector> thetas(t_init);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < t_init; ++t) {
    StatePair pair = ridge_pair(snapshots[t].y, x, config.mu,
                                config.max_alt_iters, config.tol_alt);
    thetas[t] = vectorize_theta(pair).theta;
  }
  return thetas;
}

std::vector<StatePair> batch_initialize(const std::vector<CascadeSnapshot>& snapshots,
                                        const Matrix& x, int n_states,
                                        const RidgeConfig& config,
                                        std::uint64_t rng_seed) {
  config.validate(n_states);
  const std::vector<Vector> thetas = ridge_thetas(snapshots, x, config.t_init, config);
  const ClusterModel model = kmeans(thetas, n_states, rng_seed, 300, 5);
  std::vector<StatePair> states;
  states.reserve(n_states);
  for (int s = 0; s < n_states; ++s) {
    StatePair pair = unvectorize_theta(model.centroids[s]);
    pair.a.diagonal().setZero();
    pair.state_id = s + 1;
    states.push_back(std::move(pair));
  }
  return states;
}

}  // namespace switchtrack
