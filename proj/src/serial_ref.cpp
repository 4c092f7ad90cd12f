#include "switchtrack/serial.hpp"

#include <cmath>
#include <queue>

#include "switchtrack/closed_form.hpp"

namespace switchtrack::serial {

std::vector<Vector> closed_form_thetas(const std::vector<CascadeSnapshot>& snapshots,
                                       const Matrix& x) {
  const Matrix x_pinv = pinv_full_row_rank(x);
  std::vector<Vector> thetas;
  thetas.reserve(snapshots.size());
  for (const CascadeSnapshot& snap : snapshots)
    thetas.push_back(vectorize_theta(closed_form_pair(snap.y, x, x_pinv)).theta);
  return thetas;
}

StatePair ista_inner_solve(const StatePair& start, const StateStats& stats,
                           const Matrix& x, double lambda_s, int max_inner_iters,
                           double tol_inner) {
  if (stats.alpha <= 0.0)
    throw InvalidInputError("serial ista: state has no accumulated data");
  const int n = start.n();
  const double lipschitz = lipschitz_bound(stats, x);

  StatePair cur = start;
  for (int k = 0; k < max_inner_iters; ++k) {
    StatePair next = cur;
    for (int i = 0; i < n; ++i) {
      Vector grad_a;
      double grad_b;
      ista_gradients(cur, stats, x, i, grad_a, grad_b);
      Vector a_mi(n - 1);
      for (int j = 0, col = 0; j < n; ++j)
        if (j != i) a_mi(col++) = cur.a(i, j);
      const Vector z = a_mi - grad_a / lipschitz;
      for (int j = 0, col = 0; j < n; ++j) {
        if (j == i) continue;
        next.a(i, j) = soft_threshold(z(col++), lambda_s / lipschitz);
      }
      next.a(i, i) = 0.0;
      next.b(i) = cur.b(i) - grad_b / lipschitz;
    }
    const double change = std::sqrt((next.a - cur.a).squaredNorm() +
                                    (next.b - cur.b).squaredNorm());
    const double scale = std::sqrt(next.a.squaredNorm() + next.b.squaredNorm());
    cur = std::move(next);
    if (change <= tol_inner * std::max(1.0, scale)) break;
  }
  cur.state_id = start.state_id;
  return cur;
}

namespace {

std::vector<std::vector<int>> undirected_adjacency(const Matrix& a, double threshold) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a(i, j)) > threshold || std::abs(a(j, i)) > threshold) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
  return adj;
}

}  // namespace

GraphStats graph_stats(const Matrix& a, double threshold) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw InvalidInputError("graph_stats: A must be square and nonempty");
  const int n = static_cast<int>(a.rows());
  const auto adj = undirected_adjacency(a, threshold);

  const auto bfs = [&](int source) {
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    return dist;
  };

  // largest connected component
  std::vector<int> lcc;
  std::vector<char> visited(n, 0);
  for (int start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::vector<int> members;
    std::queue<int> q;
    visited[start] = 1;
    q.push(start);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      members.push_back(u);
      for (int v : adj[u])
        if (!visited[v]) {
          visited[v] = 1;
          q.push(v);
        }
    }
    if (members.size() > lcc.size()) lcc = std::move(members);
  }

  GraphStats stats;
  stats.largest_component_size = static_cast<int>(lcc.size());
  stats.connected = stats.largest_component_size == n;

  double cc_sum = 0.0;
  std::vector<char> is_neighbor(n, 0);
  for (int u = 0; u < n; ++u) {
    const int deg = static_cast<int>(adj[u].size());
    if (deg < 2) continue;
    for (int v : adj[u]) is_neighbor[v] = 1;
    int links = 0;
    for (int v : adj[u])
      for (int w : adj[v])
        if (w > v && is_neighbor[w]) ++links;
    for (int v : adj[u]) is_neighbor[v] = 0;
    cc_sum += 2.0 * links / (static_cast<double>(deg) * (deg - 1));
  }
  stats.avg_clustering_coefficient = cc_sum / n;

  double degree_sum = 0.0;
  for (int u : lcc) degree_sum += static_cast<double>(adj[u].size());
  stats.avg_num_neighbors = lcc.empty() ? 0.0 : degree_sum / lcc.size();

  long long path_sum = 0, path_count = 0;
  int diameter = 0;
  for (int u : lcc) {
    const std::vector<int> dist = bfs(u);
    for (int v : lcc) {
      if (v == u || dist[v] < 0) continue;
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

}  // namespace switchtrack::serial
