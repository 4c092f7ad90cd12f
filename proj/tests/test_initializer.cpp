#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "switchtrack/initializer.hpp"
#include "switchtrack/sem.hpp"

using namespace switchtrack;

namespace {

StatePair random_truth(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> bdist(0.5, 1.5);
  StatePair truth;
  truth.a = Matrix::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) { return unit(rng); });
  truth.a.diagonal().setZero();
  const double rho = spectral_radius_abs(truth.a);
  if (rho > 0) truth.a *= 0.5 / rho;
  truth.b = Vector::NullaryExpr(n, [&](Eigen::Index) { return bdist(rng); });
  return truth;
}

Matrix noise_free_y(const StatePair& truth, const Matrix& x) {
  const int n = truth.n();
  return (Matrix::Identity(n, n) - truth.a).lu().solve(truth.b.asDiagonal() * x);
}

Matrix random_x(int n, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xdist(0.1, 3.0);
  return Matrix::NullaryExpr(n, c, [&](Eigen::Index, Eigen::Index) { return xdist(rng); });
}

// Strip row i from a matrix.
Matrix drop_row(const Matrix& m, int i) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(i) = m.topRows(i);
  out.bottomRows(m.rows() - 1 - i) = m.bottomRows(m.rows() - 1 - i);
  return out;
}

Vector row_without(const Matrix& a, int i) {
  const int n = static_cast<int>(a.rows());
  Vector v(n - 1);
  for (int j = 0, k = 0; j < n; ++j)
    if (j != i) v(k++) = a(i, j);
  return v;
}

}  // namespace

TEST_CASE("per-node objective matches a direct dense evaluation") {
  std::mt19937_64 rng(3);
  const int n = 5, c = 8;
  const StatePair truth = random_truth(n, rng);
  const Matrix x = random_x(n, c, rng);
  const Matrix y = noise_free_y(truth, x);
  Vector a(n - 1);
  a.setRandom();
  const double mu = 0.3, b = 0.7;
  const int i = 2;
  const Matrix y_mi = drop_row(y, i);
  const Vector r = y.row(i).transpose() - y_mi.transpose() * a - b * x.row(i).transpose();
  const double expected = 0.5 * r.squaredNorm() + mu * a.squaredNorm();
  CHECK(ridge_node_objective(y, x, i, a, b, mu) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ridge solution satisfies both stationarity conditions") {
  std::mt19937_64 rng(5);
  const int n = 6, c = 10;
  const StatePair truth = random_truth(n, rng);
  const Matrix x = random_x(n, c, rng);
  const Matrix y = noise_free_y(truth, x);
  const double mu = 0.05;
  const StatePair est = ridge_pair(y, x, mu, 20000, 1e-15);
  CHECK(est.a.diagonal().lpNorm<Eigen::Infinity>() == 0.0);
  for (int i = 0; i < n; ++i) {
    const Matrix y_mi = drop_row(y, i);
    const Vector a = row_without(est.a, i);
    const Vector xi = x.row(i).transpose();
    const Vector yi = y.row(i).transpose();
    // d/da: (Y_mi Y_mi^T + 2 mu I) a - Y_mi (y_i - b x_i) = 0
    const Vector grad_a =
        (y_mi * y_mi.transpose() + 2.0 * mu * Matrix::Identity(n - 1, n - 1)) * a -
        y_mi * (yi - est.b(i) * xi);
    CHECK(grad_a.lpNorm<Eigen::Infinity>() < 1e-6 * std::max(1.0, y.norm() * y.norm()));
    // d/db: b ||x_i||^2 - (y_i - Y_mi^T a)^T x_i = 0
    const double grad_b = est.b(i) * xi.squaredNorm() - (yi - y_mi.transpose() * a).dot(xi);
    CHECK(std::abs(grad_b) < 1e-6 * std::max(1.0, y.norm() * y.norm()));
  }
}

TEST_CASE("alternation does not increase the per-node objective") {
  std::mt19937_64 rng(7);
  const int n = 5, c = 9;
  const StatePair truth = random_truth(n, rng);
  const Matrix x = random_x(n, c, rng);
  const Matrix y = noise_free_y(truth, x);
  const double mu = 0.2;
  const StatePair est = ridge_pair(y, x, mu, 300, 1e-12);
  for (int i = 0; i < n; ++i) {
    // starting point of the alternation: a = 0, b = y_i^T x_i / ||x_i||^2
    const Vector xi = x.row(i).transpose();
    const double b0 = y.row(i).dot(x.row(i)) / xi.squaredNorm();
    const double start = ridge_node_objective(y, x, i, Vector::Zero(n - 1), b0, mu);
    const double end = ridge_node_objective(y, x, i, row_without(est.a, i), est.b(i), mu);
    CHECK(end <= start + 1e-10);
  }
}

TEST_CASE("vanishing ridge weight recovers the noise-free truth") {
  std::mt19937_64 rng(11);
  const int n = 6, c = 16;
  const StatePair truth = random_truth(n, rng);
  const Matrix x = random_x(n, c, rng);
  const Matrix y = noise_free_y(truth, x);
  const StatePair est = ridge_pair(y, x, 1e-10, 2000, 1e-14);
  const double err = ((truth.a - est.a).norm() + (truth.b - est.b).norm()) /
                     (truth.a.norm() + truth.b.norm());
  CHECK(err < 1e-3);
}

TEST_CASE("a zero susceptibility row is rejected") {
  std::mt19937_64 rng(13);
  const int n = 4, c = 6;
  const StatePair truth = random_truth(n, rng);
  Matrix x = random_x(n, c, rng);
  x.row(1).setZero();
  const Matrix y = noise_free_y(truth, x);
  CHECK_THROWS_AS(ridge_pair(y, x, 0.01), ZeroSusceptibilityError);
}

TEST_CASE("batch initializer lands near the truth on a noise-free switched stream") {
  std::mt19937_64 rng(17);
  const int n = 6, c = 12, T = 30;
  const std::vector<StatePair> truth = {random_truth(n, rng), random_truth(n, rng)};
  const Matrix x = random_x(n, c, rng);
  std::vector<CascadeSnapshot> snapshots(T);
  for (int t = 0; t < T; ++t) {
    snapshots[t].y = noise_free_y(truth[t % 2], x);
    snapshots[t].t = t + 1;
  }
  RidgeConfig config;
  config.mu = 1e-8;
  config.t_init = T;
  config.max_alt_iters = 2000;
  config.tol_alt = 1e-14;
  const auto init = batch_initialize(snapshots, x, 2, config, 23);
  REQUIRE(init.size() == 2);
  for (const StatePair& est : init) {
    CHECK(est.a.diagonal().lpNorm<Eigen::Infinity>() == 0.0);
    double best = 1e100;
    for (const StatePair& t : truth)
      best = std::min(best, ((t.a - est.a).norm() + (t.b - est.b).norm()) /
                                (t.a.norm() + t.b.norm()));
    CHECK(best < 1e-2);
  }
}

TEST_CASE("initializer config validation") {
  RidgeConfig config;
  config.mu = 0.0;
  CHECK_THROWS_AS(config.validate(1), InvalidInputError);
  config = RidgeConfig{};
  config.t_init = 0;
  CHECK_THROWS_AS(config.validate(1), InvalidInputError);
}

TEST_CASE("ridge thetas are deterministic and sized by t_init") {
  std::mt19937_64 rng(29);
  const int n = 4, c = 8, T = 10;
  const StatePair truth = random_truth(n, rng);
  const Matrix x = random_x(n, c, rng);
  std::vector<CascadeSnapshot> snapshots(T);
  for (int t = 0; t < T; ++t) {
    snapshots[t].y = noise_free_y(truth, x);
    snapshots[t].t = t + 1;
  }
  RidgeConfig config;
  const auto t1 = ridge_thetas(snapshots, x, 6, config);
  const auto t2 = ridge_thetas(snapshots, x, 6, config);
  REQUIRE(t1.size() == 6);
  for (size_t t = 0; t < t1.size(); ++t)
    CHECK((t1[t] - t2[t]).lpNorm<Eigen::Infinity>() == 0.0);
}
