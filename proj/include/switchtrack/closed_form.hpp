#pragma once

#include <cstdint>
#include <vector>

#include "switchtrack/kmeans.hpp"
#include "switchtrack/types.hpp"

namespace switchtrack {

/// vec([A b]) with column-major stacking; length N*(N+1).
struct ThetaVector {
  Vector theta;
  int source_t = 0;  // interval index, or centroid id for cluster centers
};

/// Right pseudoinverse X^T (X X^T)^{-1} of a full-row-rank N x C matrix.
/// Throws RankDeficiencyError (reporting the numerical rank) otherwise.
Matrix pinv_full_row_rank(const Matrix& x);

/// Noise-free closed-form recovery:
///   B = (Diag[(Y X†)^{-1}])^{-1},  A = I - B (Y X†)^{-1}.
/// The returned A has its diagonal exactly zeroed after verification.
StatePair closed_form_pair(const Matrix& y, const Matrix& x);
StatePair closed_form_pair(const Matrix& y, const Matrix& x, const Matrix& x_pinv);

ThetaVector vectorize_theta(const StatePair& pair);
StatePair unvectorize_theta(const Vector& theta);

struct IdentifyResult {
  std::vector<StatePair> states;
  SwitchSequence sigma;
  ClusterModel model;
  std::vector<int> failed_intervals;  // 1-based t where recovery failed
};

/// Clustering-based state identification: per-interval closed-form recovery for
/// t <= t_cluster, k-means into S centroids, then nearest-centroid assignment
/// for the operational phase t > t_cluster. Intervals whose recovery fails are
/// excluded from clustering, reported, and assigned by smallest a-priori
/// residual in the output sequence.
IdentifyResult cluster_identify(const std::vector<CascadeSnapshot>& snapshots,
                                const Matrix& x, int n_states, int t_cluster,
                                std::uint64_t rng_seed);

/// Probability 1 - (1 - p_s)^T that a state with activation probability p_s
/// is hit at least once in T intervals.
double state_coverage_probability(double p_s, int T);

}  // namespace switchtrack
