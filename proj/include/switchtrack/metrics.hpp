#pragma once

#include <vector>

#include "switchtrack/kmeans.hpp"
#include "switchtrack/types.hpp"

namespace switchtrack {

/// (||A - Ahat||_F + ||B - Bhat||_F) / (||Ahat||_F + ||Bhat||_F); the
/// denominator uses the estimates, as printed.
double relative_error(const StatePair& truth, const StatePair& est);

struct SupportScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Off-diagonal entries with |a| > threshold count as predicted edges.
SupportScore support_f1(const Matrix& truth_a, const Matrix& est_a, double threshold);

/// Max over all S! label permutations of the mean agreement; S <= 8.
double state_accuracy(const SwitchSequence& sigma_true,
                      const SwitchSequence& sigma_est, int n_states);

/// Best-accuracy label permutation: perm[est_label - 1] = truth_label. S <= 8.
std::vector<int> best_label_permutation(const SwitchSequence& sigma_true,
                                        const SwitchSequence& sigma_est, int n_states);

/// delta(S) = log10 sum_s sum_t chi_ts ||theta_t - theta_s||^2; -inf when the
/// total distance is exactly zero.
double intra_cluster_dispersion(const std::vector<Vector>& thetas,
                                const std::vector<Vector>& centroids,
                                const std::vector<int>& assignments);

struct GraphStats {
  double avg_clustering_coefficient = 0.0;
  int diameter = 0;  // hops, largest connected component
  double avg_num_neighbors = 0.0;
  double avg_shortest_path_length = 0.0;
  bool connected = true;  // false when stats cover only the largest component
  int largest_component_size = 0;
};

/// Small-world statistics of the thresholded support graph, undirected-ized
/// (edge if either direction is present). Paths by BFS over the largest
/// connected component; clustering coefficient averages per-node triangle
/// ratios with degree-<2 nodes contributing 0.
GraphStats graph_stats(const Matrix& a, double threshold);

/// Nodes ranked by descending out-degree of the thresholded directed support;
/// ties by node id.
std::vector<int> out_degree_ranking(const Matrix& a, double threshold, int top_k);

}  // namespace switchtrack
