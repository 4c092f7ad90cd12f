#include "switchtrack/closed_form.hpp"

#include <cmath>
#include <sstream>

#include "switchtrack/sem.hpp"

namespace switchtrack {

namespace {
constexpr double kRankTol = 1e-10;
}

Matrix pinv_full_row_rank(const Matrix& x) {
  const auto n = x.rows();
  if (x.cols() < n)
    throw RankDeficiencyError("pinv_full_row_rank: fewer columns than rows");
  Eigen::JacobiSVD<Matrix> svd(x);
  const Vector& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * sv(0)) ++rank;
  if (rank < n) {
    std::ostringstream msg;
    msg << "pinv_full_row_rank: X is rank-deficient (numerical rank " << rank
        << " of " << n << ")";
    throw RankDeficiencyError(msg.str());
  }
  return x.transpose() * (x * x.transpose()).llt().solve(Matrix::Identity(n, n));
}

StatePair closed_form_pair(const Matrix& y, const Matrix& x) {
  return closed_form_pair(y, x, pinv_full_row_rank(x));
}

StatePair closed_form_pair(const Matrix& y, const Matrix& x, const Matrix& x_pinv) {
  const auto n = y.rows();
  if (x.rows() != n || x.cols() != y.cols())
    throw InvalidInputError("closed_form_pair: dimension mismatch");

  const Matrix phi = y * x_pinv;
  Eigen::FullPivLU<Matrix> lu(phi);
  lu.setThreshold(kRankTol);
  if (!lu.isInvertible())
    throw DegenerateIntervalError("closed_form_pair: Y X† is singular");
  const Matrix phi_inv = lu.inverse();

  const double scale = phi_inv.cwiseAbs().maxCoeff();
  StatePair pair;
  pair.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = phi_inv(i, i);
    if (std::abs(d) <= kRankTol * std::max(1.0, scale)) {
      std::ostringstream msg;
      msg << "closed_form_pair: diagonal entry " << i
          << " of (Y X†)^{-1} is numerically zero; b_ii would be unbounded";
      throw IdentifiabilityViolationError(msg.str());
    }
    pair.b(i) = 1.0 / d;
  }
  pair.a = Matrix::Identity(n, n) - pair.b.asDiagonal() * phi_inv;
  // a(i,i) = 1 - b_i * phi_inv(i,i) = 0 up to roundoff
  pair.a.diagonal().setZero();
  return pair;
}

ThetaVector vectorize_theta(const StatePair& pair) {
  const int n = pair.n();
  ThetaVector tv;
  tv.theta.resize(n * (n + 1));
  tv.theta.head(n * n) = Eigen::Map<const Vector>(pair.a.data(), n * n);
  tv.theta.tail(n) = pair.b;
  tv.source_t = pair.state_id;
  return tv;
}

StatePair unvectorize_theta(const Vector& theta) {
  // length = n(n+1) -> n = (sqrt(1+4L)-1)/2
  const auto len = theta.size();
  const int n = static_cast<int>(std::llround((std::sqrt(1.0 + 4.0 * len) - 1.0) / 2.0));
  if (static_cast<Eigen::Index>(n) * (n + 1) != len)
    throw InvalidInputError("unvectorize_theta: length is not N(N+1)");
  StatePair pair;
  pair.a = Eigen::Map<const Matrix>(theta.data(), n, n);
  pair.b = theta.tail(n);
  return pair;
}

IdentifyResult cluster_identify(const std::vector<CascadeSnapshot>& snapshots,
                                const Matrix& x, int n_states, int t_cluster,
                                std::uint64_t rng_seed) {
  const int T = static_cast<int>(snapshots.size());
  if (t_cluster < 1 || t_cluster > T)
    throw InvalidInputError("cluster_identify: t_cluster must lie in 1..T");
  if (n_states < 1) throw InvalidInputError("cluster_identify: S must be >= 1");

  const Matrix x_pinv = pinv_full_row_rank(x);

  std::vector<Vector> thetas(T);
  std::vector<char> ok(T, 0);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < T; ++t) {
    try {
      thetas[t] = vectorize_theta(closed_form_pair(snapshots[t].y, x, x_pinv)).theta;
      ok[t] = 1;
    } catch (const NumericalError&) {
      ok[t] = 0;
    }
  }

  IdentifyResult result;
  std::vector<Vector> training;
  std::vector<int> training_t;
  for (int t = 0; t < t_cluster; ++t) {
    if (ok[t]) {
      training.push_back(thetas[t]);
      training_t.push_back(t);
    } else {
      result.failed_intervals.push_back(t + 1);
    }
  }
  for (int t = t_cluster; t < T; ++t)
    if (!ok[t]) result.failed_intervals.push_back(t + 1);
  if (static_cast<int>(training.size()) < n_states)
    throw DegenerateIntervalError(
        "cluster_identify: fewer recoverable intervals than states");

  result.model = kmeans(training, n_states, rng_seed, 300, 5);
  for (int s = 0; s < n_states; ++s) {
    StatePair pair = unvectorize_theta(result.model.centroids[s]);
    pair.a.diagonal().setZero();
    pair.state_id = s + 1;
    result.states.push_back(std::move(pair));
  }

  result.sigma.sigma.assign(T, 1);
  for (std::size_t j = 0; j < training_t.size(); ++j)
    result.sigma.sigma[training_t[j]] = result.model.assignments[j];
  for (int t = 0; t < T; ++t) {
    if (t < t_cluster && ok[t]) continue;
    if (ok[t]) {
      result.sigma.sigma[t] = assign_cluster(thetas[t], result.model.centroids);
    } else {
      // no theta available; fall back to the a-priori residual criterion
      int best = 1;
      double best_r = std::numeric_limits<double>::infinity();
      for (int s = 0; s < n_states; ++s) {
        const double r = sem_residual(snapshots[t].y, x, result.states[s]);
        if (r < best_r) {
          best_r = r;
          best = s + 1;
        }
      }
      result.sigma.sigma[t] = best;
    }
  }
  return result;
}

double state_coverage_probability(double p_s, int T) {
  if (p_s < 0.0 || p_s > 1.0)
    throw InvalidInputError("state_coverage_probability: p must lie in [0,1]");
  if (T < 0) throw InvalidInputError("state_coverage_probability: T must be >= 0");
  return 1.0 - std::pow(1.0 - p_s, T);
}

}  // namespace switchtrack
