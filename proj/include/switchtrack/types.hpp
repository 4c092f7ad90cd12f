#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "switchtrack/errors.hpp"

namespace switchtrack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Node-by-contagion susceptibilities, constant over time.
using ExogenousMatrix = Matrix;

/// One network state: hollow edge-weight matrix `a` and the diagonal of the
/// exogenous-gain matrix stored as a vector `b`.
struct StatePair {
  Matrix a;  // N x N, a(i,i) == 0
  Vector b;  // length N
  int state_id = 0;

  int n() const { return static_cast<int>(a.rows()); }

  /// Residual Y - A*Y - diag(b)*X as a dense matrix.
  Matrix residual(const Matrix& y, const Matrix& x) const {
    return y - a * y - b.asDiagonal() * x;
  }
};

/// First-infection-time observations for one interval.
struct CascadeSnapshot {
  Matrix y;   // N x C
  int t = 0;  // 1-based interval index
};

/// Active-state index per interval, values in 1..S.
struct SwitchSequence {
  std::vector<int> sigma;

  int T() const { return static_cast<int>(sigma.size()); }
};

enum class SwitchMode { iid, piecewise };

struct GenerationConfig {
  int n_nodes = 0;
  int n_cascades = 0;
  int n_intervals = 0;
  int n_states = 1;
  double noise_std = 0.0;
  std::uint64_t rng_seed = 0;
  std::vector<double> state_probabilities;  // empty -> uniform 1/S
  // Nonzero entries of synthetic A^s are the Kronecker support scaled so the
  // spectral radius of |A^s| equals spectral_scale, keeping I - A^s invertible.
  double spectral_scale = 0.5;
  SwitchMode switch_mode = SwitchMode::iid;

  void validate() const;
};

}  // namespace switchtrack
