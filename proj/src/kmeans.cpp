#include "switchtrack/kmeans.hpp"

#include <limits>
#include <random>

namespace switchtrack {

int assign_cluster(const Vector& point, const std::vector<Vector>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = (point - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best + 1;
}

namespace {

std::vector<Vector> seed_plus_plus(const std::vector<Vector>& points, int k,
                                   std::mt19937_64& rng) {
  const int n = static_cast<int>(points.size());
  std::vector<Vector> centroids;
  centroids.reserve(k);
  std::uniform_int_distribution<int> first(0, n - 1);
  centroids.push_back(points[first(rng)]);

  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vector& c : centroids)
        best = std::min(best, (points[i] - c).squaredNorm());
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // all points coincide with existing centroids; duplicate one
      centroids.push_back(points[0]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      r -= d2[i];
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

ClusterModel lloyd_once(const std::vector<Vector>& points, int k,
                        std::mt19937_64& rng, int max_iter) {
  const int n = static_cast<int>(points.size());
  ClusterModel model;
  model.centroids = seed_plus_plus(points, k, rng);
  model.assignments.assign(n, 1);

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    double inertia = 0.0;
#pragma omp parallel for reduction(+ : inertia) schedule(static)
    for (int i = 0; i < n; ++i) {
      model.assignments[i] = assign_cluster(points[i], model.centroids);
      inertia += (points[i] - model.centroids[model.assignments[i] - 1]).squaredNorm();
    }
    model.inertia = inertia;

    std::vector<Vector> sums(k, Vector::Zero(points[0].size()));
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[model.assignments[i] - 1] += points[i];
      ++counts[model.assignments[i] - 1];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        model.centroids[c] = sums[c] / counts[c];
      } else {
        // re-seed an empty cluster with the point farthest from its centroid
        int far_i = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (points[i] - model.centroids[model.assignments[i] - 1]).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        model.centroids[c] = points[far_i];
      }
    }

    if (prev_inertia - inertia <= 1e-12 * std::max(1.0, prev_inertia)) break;
    prev_inertia = inertia;
  }

  // final assignment pass so labels and inertia match the returned centroids
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    model.assignments[i] = assign_cluster(points[i], model.centroids);
    inertia += (points[i] - model.centroids[model.assignments[i] - 1]).squaredNorm();
  }
  model.inertia = inertia;
  return model;
}

}  // namespace

ClusterModel kmeans(const std::vector<Vector>& points, int k,
                    std::uint64_t rng_seed, int max_iter, int n_init) {
  if (points.empty()) throw InvalidInputError("kmeans: empty input");
  if (k < 1) throw InvalidInputError("kmeans: k must be >= 1");
  if (k > static_cast<int>(points.size()))
    throw InvalidInputError("kmeans: k exceeds number of points");

  std::mt19937_64 rng(rng_seed);
  ClusterModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, n_init); ++r) {
    ClusterModel model = lloyd_once(points, k, rng, max_iter);
    if (model.inertia < best.inertia) best = std::move(model);
  }
  return best;
}

}  // namespace switchtrack
