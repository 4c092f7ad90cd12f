// Timing comparison: OpenMP kernels vs their serial reference counterparts.
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "switchtrack/closed_form.hpp"
#include "switchtrack/metrics.hpp"
#include "switchtrack/sem.hpp"
#include "switchtrack/serial.hpp"
#include "switchtrack/tracker.hpp"

using namespace switchtrack;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  return dt.count() / reps;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-24s serial %8.4f s   parallel %8.4f s   speedup %.2fx\n", name,
              serial_s, parallel_s, serial_s / parallel_s);
}

}  // namespace

int main() {
  GenerationConfig gen;
  gen.n_nodes = 64;
  gen.n_cascades = 80;
  gen.n_intervals = 200;
  gen.n_states = 4;
  gen.noise_std = 0.1;
  gen.rng_seed = 7;

  const auto states = random_state_set(gen, standard_kronecker_seeds(), 3);
  const auto x = random_susceptibility(gen.n_nodes, gen.n_cascades, 1);
  const auto sigma =
      random_switch_sequence(gen.n_intervals, std::vector<double>(4, 0.25), 2);
  const auto snapshots = generate_cascades(states, x, sigma, gen.noise_std, 3);

  // per-interval closed-form map
  const Matrix x_pinv = pinv_full_row_rank(x);
  const auto parallel_thetas = [&] {
    std::vector<Vector> thetas(snapshots.size());
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < static_cast<int>(snapshots.size()); ++t)
      thetas[t] = vectorize_theta(closed_form_pair(snapshots[t].y, x, x_pinv)).theta;
    return thetas;
  };
  report("closed_form_thetas",
         seconds([&] { serial::closed_form_thetas(snapshots, x); }, 3),
         seconds([&] { parallel_thetas(); }, 3));

  // ISTA inner solve on accumulated statistics
  TrackerStats stats = TrackerStats::zero(1, gen.n_nodes, gen.n_cascades);
  for (const auto& snap : snapshots) update_stats(stats, snap.y, 1, 0.98);
  StatePair start;
  start.a = Matrix::Zero(gen.n_nodes, gen.n_nodes);
  start.b = Vector::Ones(gen.n_nodes);
  IstaOptions opts;
  opts.lambda_s = 0.95;
  opts.max_inner_iters = 50;
  opts.tol_inner = 0.0;
  report("ista_inner_solve",
         seconds(
             [&] {
               serial::ista_inner_solve(start, stats.per_state[0], x, 0.95, 50, 0.0);
             },
             5),
         seconds([&] { ista_inner_solve(start, stats.per_state[0], x, opts); }, 5));

  // BFS graph statistics on a denser synthetic support
  GenerationConfig big = gen;
  big.n_nodes = 1024;
  big.n_cascades = 1;
  big.n_intervals = 1;
  const auto big_states = random_state_set(big, standard_kronecker_seeds(), 5);
  report("graph_stats",
         seconds([&] { serial::graph_stats(big_states[0].a, 1e-6); }, 3),
         seconds([&] { graph_stats(big_states[0].a, 1e-6); }, 3));
  return 0;
}
