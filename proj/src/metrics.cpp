#include "switchtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace switchtrack {

double relative_error(const StatePair& truth, const StatePair& est) {
  if (truth.a.rows() != est.a.rows() || truth.b.size() != est.b.size())
    throw InvalidInputError("relative_error: dimension mismatch");
  const double denom = est.a.norm() + est.b.norm();
  if (denom <= 0.0)
    throw UndefinedMetricError("relative_error: estimate has zero norm");
  return ((truth.a - est.a).norm() + (truth.b - est.b).norm()) / denom;
}

SupportScore support_f1(const Matrix& truth_a, const Matrix& est_a, double threshold) {
  if (threshold < 0.0) throw InvalidInputError("support_f1: threshold must be >= 0");
  if (truth_a.rows() != est_a.rows() || truth_a.cols() != est_a.cols())
    throw InvalidInputError("support_f1: dimension mismatch");
  long tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < truth_a.rows(); ++i) {
    for (Eigen::Index j = 0; j < truth_a.cols(); ++j) {
      if (i == j) continue;
      const bool truth_edge = std::abs(truth_a(i, j)) > threshold;
      const bool est_edge = std::abs(est_a(i, j)) > threshold;
      if (est_edge && truth_edge) ++tp;
      else if (est_edge) ++fp;
      else if (truth_edge) ++fn;
    }
  }
  SupportScore score;
  score.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  score.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  score.f1 = score.precision + score.recall > 0.0
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

namespace {

double permuted_accuracy(const SwitchSequence& sigma_true,
                         const SwitchSequence& sigma_est,
                         const std::vector<int>& perm) {
  int agree = 0;
  for (std::size_t t = 0; t < sigma_true.sigma.size(); ++t)
    if (perm[sigma_est.sigma[t] - 1] == sigma_true.sigma[t]) ++agree;
  return static_cast<double>(agree) / sigma_true.sigma.size();
}

}  // namespace

std::vector<int> best_label_permutation(const SwitchSequence& sigma_true,
                                        const SwitchSequence& sigma_est, int n_states) {
  if (n_states < 1 || n_states > 8)
    throw InvalidInputError("state_accuracy: S must lie in 1..8");
  if (sigma_true.sigma.size() != sigma_est.sigma.size() || sigma_true.sigma.empty())
    throw InvalidInputError("state_accuracy: sequences must be nonempty and equal length");

  std::vector<int> perm(n_states);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<int> best = perm;
  double best_acc = -1.0;
  do {
    const double acc = permuted_accuracy(sigma_true, sigma_est, perm);
    if (acc > best_acc) {
      best_acc = acc;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double state_accuracy(const SwitchSequence& sigma_true,
                      const SwitchSequence& sigma_est, int n_states) {
  const std::vector<int> perm = best_label_permutation(sigma_true, sigma_est, n_states);
  return permuted_accuracy(sigma_true, sigma_est, perm);
}

double intra_cluster_dispersion(const std::vector<Vector>& thetas,
                                const std::vector<Vector>& centroids,
                                const std::vector<int>& assignments) {
  if (thetas.empty() || thetas.size() != assignments.size())
    throw InvalidInputError("intra_cluster_dispersion: bad input sizes");
  double total = 0.0;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    const int s = assignments[t];
    if (s < 1 || s > static_cast<int>(centroids.size()))
      throw InvalidInputError("intra_cluster_dispersion: assignment out of range");
    total += (thetas[t] - centroids[s - 1]).squaredNorm();
  }
  if (total <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log10(total);
}

namespace {

struct UndirectedGraph {
  int n = 0;
  std::vector<std::vector<int>> adj;
};

UndirectedGraph thresholded_undirected(const Matrix& a, double threshold) {
  const int n = static_cast<int>(a.rows());
  UndirectedGraph g;
  g.n = n;
  g.adj.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a(i, j)) > threshold || std::abs(a(j, i)) > threshold) {
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }
  return g;
}

std::vector<int> bfs_hops(const UndirectedGraph& g, int source) {
  std::vector<int> dist(g.n, -1);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : g.adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
  }
  return dist;
}

std::vector<int> largest_component(const UndirectedGraph& g) {
  std::vector<int> comp(g.n, -1);
  std::vector<int> best;
  for (int start = 0; start < g.n; ++start) {
    if (comp[start] >= 0) continue;
    std::vector<int> members;
    std::queue<int> frontier;
    comp[start] = start;
    frontier.push(start);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      members.push_back(u);
      for (int v : g.adj[u])
        if (comp[v] < 0) {
          comp[v] = start;
          frontier.push(v);
        }
    }
    if (members.size() > best.size()) best = std::move(members);
  }
  return best;
}

}  // namespace

GraphStats graph_stats(const Matrix& a, double threshold) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw InvalidInputError("graph_stats: A must be square and nonempty");
  const UndirectedGraph g = thresholded_undirected(a, threshold);

  GraphStats stats;
  const std::vector<int> lcc = largest_component(g);
  stats.largest_component_size = static_cast<int>(lcc.size());
  stats.connected = stats.largest_component_size == g.n;

  // clustering coefficient over all nodes; degree < 2 contributes 0
  double cc_sum = 0.0;
  std::vector<char> is_neighbor(g.n, 0);
  for (int u = 0; u < g.n; ++u) {
    const auto& nb = g.adj[u];
    const int deg = static_cast<int>(nb.size());
    if (deg < 2) continue;
    for (int v : nb) is_neighbor[v] = 1;
    int links = 0;
    for (int v : nb)
      for (int w : g.adj[v])
        if (w > v && is_neighbor[w]) ++links;
    for (int v : nb) is_neighbor[v] = 0;
    cc_sum += 2.0 * links / (static_cast<double>(deg) * (deg - 1));
  }
  stats.avg_clustering_coefficient = cc_sum / g.n;

  double degree_sum = 0.0;
  for (int u : lcc) degree_sum += static_cast<double>(g.adj[u].size());
  stats.avg_num_neighbors = lcc.empty() ? 0.0 : degree_sum / lcc.size();

  // BFS from every node of the largest component
  const int m = static_cast<int>(lcc.size());
  long long path_sum = 0;
  long long path_count = 0;
  int diameter = 0;
#pragma omp parallel for reduction(+ : path_sum, path_count) \
    reduction(max : diameter) schedule(dynamic)
  for (int idx = 0; idx < m; ++idx) {
    const std::vector<int> dist = bfs_hops(g, lcc[idx]);
    for (int v : lcc) {
      if (v == lcc[idx] || dist[v] < 0) continue;
      path_sum += dist[v];
      ++path_count;
      diameter = std::max(diameter, dist[v]);
    }
  }
  stats.diameter = diameter;
  stats.avg_shortest_path_length =
      path_count > 0 ? static_cast<double>(path_sum) / path_count : 0.0;
  return stats;
}

std::vector<int> out_degree_ranking(const Matrix& a, double threshold, int top_k) {
  if (a.rows() != a.cols()) throw InvalidInputError("out_degree_ranking: A must be square");
  const int n = static_cast<int>(a.rows());
  // column j holds the out-edges of node j (a_ij: edge j -> i)
  std::vector<std::pair<int, int>> degree(n);  // (out-degree, node)
  for (int j = 0; j < n; ++j) {
    int d = 0;
    for (int i = 0; i < n; ++i)
      if (i != j && std::abs(a(i, j)) > threshold) ++d;
    degree[j] = {d, j};
  }
  std::stable_sort(degree.begin(), degree.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first > r.first : l.second < r.second;
  });
  std::vector<int> ranked;
  const int k = top_k < 0 ? n : std::min(top_k, n);
  for (int i = 0; i < k; ++i) ranked.push_back(degree[i].second);
  return ranked;
}

}  // namespace switchtrack
