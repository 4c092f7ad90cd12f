#pragma once

#include <cstdint>
#include <vector>

#include "switchtrack/types.hpp"

namespace switchtrack {

struct ClusterModel {
  std::vector<Vector> centroids;
  std::vector<int> assignments;  // 1-based cluster labels
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic given rng_seed;
/// assignment ties break toward the smaller cluster index. `n_init` restarts
/// are run and the model with the smallest inertia is kept.
ClusterModel kmeans(const std::vector<Vector>& points, int k,
                    std::uint64_t rng_seed, int max_iter = 300, int n_init = 1);

/// Nearest centroid in Euclidean distance, 1-based, ties to the smaller index.
int assign_cluster(const Vector& point, const std::vector<Vector>& centroids);

}  // namespace switchtrack
