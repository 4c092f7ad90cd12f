#pragma once

#include <cstdint>
#include <vector>

#include "switchtrack/types.hpp"

namespace switchtrack {

struct RidgeConfig {
  double mu = 0.01;      // ridge weight, > 0
  int t_init = 50;       // number of initialization intervals
  int max_alt_iters = 200;
  double tol_alt = 1e-8; // relative change threshold for the alternation

  void validate(int n_states) const;
};

/// Per-node objective of the ridge-regularized per-interval LS fit:
///   1/2 ||y_i - Y_{-i}^T a - b x_i||^2 + mu ||a||^2.
double ridge_node_objective(const Matrix& y, const Matrix& x, int i,
                            const Vector& a_minus_i, double b_ii, double mu);

/// Per-interval ridge estimate via per-node alternating closed forms:
///   a_{-i} = (Y_{-i} Y_{-i}^T + 2 mu I)^{-1} Y_{-i} (y_i - b_ii x_i)
///   b_ii   = (y_i^T - a_{-i}^T Y_{-i}) x_i / ||x_i||^2
/// starting from b_ii = y_i^T x_i / ||x_i||^2. The objective is non-increasing
/// across alternations; rows are reassembled with a zero diagonal.
StatePair ridge_pair(const Matrix& y, const Matrix& x, double mu,
                     int max_alt_iters = 200, double tol_alt = 1e-8);

/// Ridge estimates for snapshots[0..t_init), vectorized and clustered into S
/// centroids; centroids are unvectorized into the initial StatePairs.
std::vector<StatePair> batch_initialize(const std::vector<CascadeSnapshot>& snapshots,
                                        const Matrix& x, int n_states,
                                        const RidgeConfig& config,
                                        std::uint64_t rng_seed);

/// The per-interval theta estimates behind batch_initialize; used for the
/// delta(S) model-order sweep.
std::vector<Vector> ridge_thetas(const std::vector<CascadeSnapshot>& snapshots,
                                 const Matrix& x, int t_init, const RidgeConfig& config);

}  // namespace switchtrack
