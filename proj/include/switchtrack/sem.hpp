#pragma once

#include <cstdint>
#include <vector>

#include "switchtrack/types.hpp"

namespace switchtrack {

/// Repeated Kronecker product of a binary seed with itself (`power` factors),
/// diagonal zeroed afterward. Output is m^power x m^power.
Matrix kronecker_graph(const Matrix& seed, int power);

/// The four 4x4 seed matrices used for the synthetic state set.
const std::vector<Matrix>& standard_kronecker_seeds();

/// S StatePairs with supports from Kronecker graphs (seeds cycled if S exceeds
/// their count), nonzero weights scaled to spectral radius config.spectral_scale,
/// and b entries i.i.d. U[0,1]. Deterministic given config.rng_seed.
std::vector<StatePair> random_state_set(const GenerationConfig& config,
                                        const std::vector<Matrix>& seeds,
                                        int power);

/// X with entries i.i.d. U[0,3].
ExogenousMatrix random_susceptibility(int n_nodes, int n_cascades,
                                      std::uint64_t rng_seed);

/// i.i.d. categorical switching sequence with probabilities p_s.
SwitchSequence random_switch_sequence(int T, const std::vector<double>& p,
                                      std::uint64_t rng_seed);

/// The fixed piecewise-constant 4-state schedule of the second synthetic
/// experiment, truncated or cycled to length T.
SwitchSequence piecewise_switch_sequence(int T);

/// Y_t = (I - A^{sigma(t)})^{-1} (B^{sigma(t)} X + E_t) with E_t Gaussian.
/// Per-interval noise uses a (seed, t) substream, so results are independent
/// of evaluation order.
std::vector<CascadeSnapshot> generate_cascades(const std::vector<StatePair>& states,
                                               const ExogenousMatrix& x,
                                               const SwitchSequence& sigma,
                                               double noise_std,
                                               std::uint64_t rng_seed);

/// Frobenius norm of Y - A*Y - B*X.
double sem_residual(const Matrix& y, const Matrix& x, const StatePair& pair);

/// Spectral radius of |M| by power iteration.
double spectral_radius_abs(const Matrix& m);

/// Deterministic per-interval RNG substream seed.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t t);

}  // namespace switchtrack
