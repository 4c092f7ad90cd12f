#pragma once

#include <vector>

#include "switchtrack/metrics.hpp"
#include "switchtrack/tracker.hpp"
#include "switchtrack/types.hpp"

// Single-threaded reference implementations of the OpenMP kernels. Kept
// deliberately simple; the test suites assert the parallel paths match these,
// and the bench tool compares their runtimes.
namespace switchtrack::serial {

/// Per-interval closed-form theta map, sequential.
std::vector<Vector> closed_form_thetas(const std::vector<CascadeSnapshot>& snapshots,
                                       const Matrix& x);

/// Sequential ISTA inner solve built from the public per-node gradient and
/// prox operators; exact-Lipschitz stepping only.
StatePair ista_inner_solve(const StatePair& start, const StateStats& stats,
                           const Matrix& x, double lambda_s, int max_inner_iters,
                           double tol_inner);

/// Sequential BFS-based graph statistics.
GraphStats graph_stats(const Matrix& a, double threshold);

}  // namespace switchtrack::serial
