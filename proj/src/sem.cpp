#include "switchtrack/sem.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace switchtrack {

void GenerationConfig::validate() const {
  if (n_nodes < 1 || n_cascades < 1 || n_intervals < 1 || n_states < 1)
    throw InvalidInputError("generation config: N, C, T, S must all be >= 1");
  if (noise_std < 0.0)
    throw InvalidInputError("generation config: noise_std must be >= 0");
  if (!state_probabilities.empty()) {
    if (static_cast<int>(state_probabilities.size()) != n_states)
      throw InvalidInputError("generation config: state_probabilities length != S");
    double sum = 0.0;
    for (double p : state_probabilities) {
      if (p < 0.0) throw InvalidInputError("generation config: p_s must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InvalidInputError("generation config: state probabilities must sum to 1");
  }
  if (spectral_scale <= 0.0 || spectral_scale >= 1.0)
    throw InvalidInputError("generation config: spectral_scale must lie in (0,1)");
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t t) {
  // splitmix64 finalizer over (seed, t)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (t + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix kronecker_graph(const Matrix& seed, int power) {
  if (power < 1) throw InvalidInputError("kronecker_graph: power must be >= 1");
  if (seed.rows() != seed.cols() || seed.rows() < 1)
    throw InvalidInputError("kronecker_graph: seed must be square and nonempty");
  for (Eigen::Index i = 0; i < seed.rows(); ++i)
    for (Eigen::Index j = 0; j < seed.cols(); ++j)
      if (seed(i, j) != 0.0 && seed(i, j) != 1.0)
        throw InvalidInputError("kronecker_graph: seed entries must be 0 or 1");

  Matrix result = seed;
  for (int f = 1; f < power; ++f) {
    const Matrix prev = result;
    const Eigen::Index r = prev.rows(), m = seed.rows();
    Matrix next(r * m, r * m);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        next.block(i * m, j * m, m, m) = prev(i, j) * seed;
    result = std::move(next);
  }
  result.diagonal().setZero();
  return result;
}

const std::vector<Matrix>& standard_kronecker_seeds() {
  static const std::vector<Matrix> seeds = [] {
    std::vector<Matrix> v(4, Matrix::Zero(4, 4));
    v[0] << 1, 1, 0, 0,
            1, 1, 0, 0,
            0, 0, 0, 1,
            0, 0, 1, 0;
    v[1] << 1, 0, 0, 0,
            0, 1, 1, 0,
            0, 1, 1, 1,
            0, 0, 1, 0;
    v[2] << 1, 0, 0, 0,
            0, 1, 0, 0,
            0, 0, 1, 1,
            0, 0, 1, 1;
    v[3] << 1, 0, 0, 0,
            0, 0, 1, 0,
            0, 1, 1, 1,
            0, 0, 0, 1;
    return v;
  }();
  return seeds;
}

double spectral_radius_abs(const Matrix& m) {
  const Matrix a = m.cwiseAbs();
  if (a.size() == 0 || a.maxCoeff() == 0.0) return 0.0;
  Vector v = Vector::Ones(a.rows());
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    if (it > 2 && std::abs(norm - lambda) <= 1e-12 * std::max(1.0, norm)) {
      lambda = norm;
      break;
    }
    lambda = norm;
    v = std::move(w);
  }
  return lambda;
}

std::vector<StatePair> random_state_set(const GenerationConfig& config,
                                        const std::vector<Matrix>& seeds,
                                        int power) {
  config.validate();
  if (seeds.empty()) throw InvalidInputError("random_state_set: no seed matrices");
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<StatePair> states;
  states.reserve(config.n_states);
  for (int s = 0; s < config.n_states; ++s) {
    Matrix support = kronecker_graph(seeds[s % seeds.size()], power);
    if (support.rows() != config.n_nodes)
      throw InvalidInputError("random_state_set: seed^power size != n_nodes");
    const double rho = spectral_radius_abs(support);
    StatePair pair;
    pair.a = rho > 0.0 ? Matrix(support * (config.spectral_scale / rho))
                       : support;
    pair.b = Vector::NullaryExpr(config.n_nodes, [&](Eigen::Index) { return unit(rng); });
    pair.state_id = s + 1;
    states.push_back(std::move(pair));
  }
  return states;
}

ExogenousMatrix random_susceptibility(int n_nodes, int n_cascades,
                                      std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> dist(0.0, 3.0);
  Matrix x(n_nodes, n_cascades);
  for (int i = 0; i < n_nodes; ++i)
    for (int c = 0; c < n_cascades; ++c) x(i, c) = dist(rng);
  return x;
}

SwitchSequence random_switch_sequence(int T, const std::vector<double>& p,
                                      std::uint64_t rng_seed) {
  if (T < 0) throw InvalidInputError("random_switch_sequence: T must be >= 0");
  if (p.empty()) throw InvalidInputError("random_switch_sequence: empty probabilities");
  std::mt19937_64 rng(rng_seed);
  std::discrete_distribution<int> dist(p.begin(), p.end());
  SwitchSequence seq;
  seq.sigma.resize(T);
  for (int t = 0; t < T; ++t) seq.sigma[t] = dist(rng) + 1;
  return seq;
}

SwitchSequence piecewise_switch_sequence(int T) {
  SwitchSequence seq;
  seq.sigma.resize(T);
  for (int t = 1; t <= T; ++t) {
    const int u = ((t - 1) % 1000) + 1;
    int s;
    if (u <= 24 || (u >= 200 && u <= 299)) s = 1;
    else if (u <= 49 || (u >= 300 && u <= 699)) s = 2;
    else if (u <= 74 || (u >= 700 && u <= 899)) s = 3;
    else s = 4;
    seq.sigma[t - 1] = s;
  }
  return seq;
}

namespace {

// Partial-pivoting LU solve with a cheap condition estimate; a condition
// number above 1e12 is treated as a singular model.
Eigen::PartialPivLU<Matrix> factor_or_throw(const Matrix& m, int state_id) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix inv = lu.inverse();
  const double inv_norm = inv.cwiseAbs().rowwise().sum().maxCoeff();
  if (!std::isfinite(inv_norm) || norm * inv_norm > 1e12) {
    std::ostringstream msg;
    msg << "generate_cascades: I - A^s is numerically singular for state " << state_id;
    throw SingularModelError(msg.str());
  }
  return lu;
}

}  // namespace

std::vector<CascadeSnapshot> generate_cascades(const std::vector<StatePair>& states,
                                               const ExogenousMatrix& x,
                                               const SwitchSequence& sigma,
                                               double noise_std,
                                               std::uint64_t rng_seed) {
  if (states.empty()) throw InvalidInputError("generate_cascades: no states");
  const int n = states[0].n();
  const int c = static_cast<int>(x.cols());
  if (x.rows() != n) throw InvalidInputError("generate_cascades: X row count != N");

  std::vector<Eigen::PartialPivLU<Matrix>> factors;
  factors.reserve(states.size());
  for (const StatePair& s : states) {
    if (s.a.rows() != n || s.b.size() != n)
      throw InvalidInputError("generate_cascades: inconsistent state dimensions");
    factors.push_back(factor_or_throw(Matrix::Identity(n, n) - s.a, s.state_id));
  }

  const int T = sigma.T();
  for (int s : sigma.sigma)
    if (s < 1 || s > static_cast<int>(states.size()))
      throw InvalidInputError("generate_cascades: sigma entry out of range");

  std::vector<CascadeSnapshot> out(T);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < T; ++t) {
    const int s = sigma.sigma[t];
    Matrix rhs = states[s - 1].b.asDiagonal() * x;
    if (noise_std > 0.0) {
      std::mt19937_64 rng(substream_seed(rng_seed, static_cast<std::uint64_t>(t)));
      std::normal_distribution<double> noise(0.0, noise_std);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) rhs(i, j) += noise(rng);
    }
    out[t].y = factors[s - 1].solve(rhs);
    out[t].t = t + 1;
  }
  return out;
}

double sem_residual(const Matrix& y, const Matrix& x, const StatePair& pair) {
  if (y.rows() != pair.a.rows() || x.rows() != pair.a.rows() || y.cols() != x.cols())
    throw InvalidInputError("sem_residual: dimension mismatch");
  return pair.residual(y, x).norm();
}

}  // namespace switchtrack
