// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "switchtrack/commands.hpp"
#include "switchtrack/io.hpp"
#include "switchtrack/metrics.hpp"
#include "switchtrack/sem.hpp"
#include "switchtrack/serial.hpp"

using namespace switchtrack;
namespace fs = std::filesystem;

namespace {

// --- minimal SHA-256 (FIPS 180-4), enough to fingerprint output files ---
struct Sha256 {
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::uint64_t total = 0;
  unsigned char buf[64];
  std::size_t fill = 0;

  static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void block(const unsigned char* p) {
    static const std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
        0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
        0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
        0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
        0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
        0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5],
                  g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      hh = g; g = f; f = e; e = d + t1;
      d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  void update(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    total += len;
    while (len > 0) {
      const std::size_t take = std::min<std::size_t>(64 - fill, len);
      std::memcpy(buf + fill, p, take);
      fill += take;
      p += take;
      len -= take;
      if (fill == 64) {
        block(buf);
        fill = 0;
      }
    }
  }

  std::string hex() {
    const std::uint64_t bits = total * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(len, 8);
    char out[65];
    for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 64);
  }
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing:" + path + ">";
  Sha256 sha;
  char chunk[65536];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0)
    sha.update(chunk, static_cast<std::size_t>(in.gcount()));
  return sha.hex();
}

// ---------------------------------------------------------------------------

int failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", idx, detail.c_str());
  if (!pass) ++failures;
}

StatePair random_truth(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> bdist(0.5, 1.5);
  StatePair truth;
  truth.a = Matrix::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) { return unit(rng); });
  truth.a.diagonal().setZero();
  const double rho = spectral_radius_abs(truth.a);
  if (rho > 0) truth.a *= 0.5 / rho;
  truth.b = Vector::NullaryExpr(n, [&](Eigen::Index) { return bdist(rng); });
  return truth;
}

Matrix noise_free_y(const StatePair& truth, const Matrix& x) {
  const int n = truth.n();
  return (Matrix::Identity(n, n) - truth.a).lu().solve(truth.b.asDiagonal() * x);
}

std::string temp_dir(const std::string& name) {
  const std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  return dir;
}

StateStats batch_stats(const std::vector<Matrix>& ys, double beta) {
  StateStats stats;
  const int T = static_cast<int>(ys.size());
  stats.omega = Matrix::Zero(ys[0].rows(), ys[0].rows());
  stats.ybar = Matrix::Zero(ys[0].rows(), ys[0].cols());
  for (int tau = 0; tau < T; ++tau) {
    const double w = std::pow(beta, T - 1 - tau);
    stats.omega += w * ys[tau] * ys[tau].transpose();
    stats.ybar += w * ys[tau];
    stats.alpha += w;
  }
  return stats;
}

// 1. Exact noise-free recovery across random instances.
void criterion1() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> xdist(0.0, 3.0);
  double worst = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::vector<int>{4, 8, 16}[trial % 3];
    const int c = n + 4;
    const StatePair truth = random_truth(n, rng);
    const Matrix x =
        Matrix::NullaryExpr(n, c, [&](Eigen::Index, Eigen::Index) { return xdist(rng); });
    const StatePair est = closed_form_pair(noise_free_y(truth, x), x);
    const double err = ((truth.a - est.a).norm() + (truth.b - est.b).norm()) /
                       (truth.a.norm() + truth.b.norm());
    worst = std::max(worst, err);
    if (err > 1e-8) pass = false;
  }
  report(1, pass, "closed-form recovery, 100 noise-free trials, worst relative error " +
                      format_double(worst) + " (limit 1e-8)");
}

ExperimentConfig synthetic_config(const std::string& out_dir, SwitchMode mode) {
  ExperimentConfig config;
  config.generation.n_nodes = 64;
  config.generation.n_cascades = 80;
  config.generation.n_intervals = 1000;
  config.generation.n_states = 4;
  config.generation.noise_std = 0.1;  // variance 0.01
  config.generation.switch_mode = mode;
  config.ridge.mu = 0.01;
  config.ridge.t_init = 50;
  config.clustering.n_states = 4;
  config.tracker.lambda = {0.95};
  config.tracker.beta = 0.98;
  config.output_dir = out_dir;
  config.rng_seed = 2024;
  return config;
}

// 2. Synthetic stream with i.i.d. switching: tail state accuracy and support F1.
void criterion2() {
  const std::string data_dir = temp_dir("st_acc2_data");
  ExperimentConfig config = synthetic_config(data_dir, SwitchMode::iid);
  const std::string manifest = cmd_generate(config);
  config.output_dir = temp_dir("st_acc2_out");
  cmd_track(manifest, config);
  const std::string eval_dir = temp_dir("st_acc2_eval");
  const EvaluationReport eval = cmd_evaluate(config.output_dir, manifest, eval_dir);
  double min_f1 = 1.0;
  for (const SupportScore& s : eval.support) min_f1 = std::min(min_f1, s.f1);
  const bool pass = eval.state_accuracy_tail >= 0.90 && min_f1 >= 0.7;
  report(2, pass, "64-node stream: tail accuracy " +
                      format_double(eval.state_accuracy_tail) +
                      " (limit 0.90), min support F1 " + format_double(min_f1) +
                      " (limit 0.7)");
  fs::remove_all(data_dir);
  fs::remove_all(config.output_dir);
  fs::remove_all(eval_dir);
}

// 3. Piecewise-constant switching: tracking at least halves the initial error.
void criterion3() {
  const std::string data_dir = temp_dir("st_acc3_data");
  ExperimentConfig config = synthetic_config(data_dir, SwitchMode::piecewise);
  const std::string manifest = cmd_generate(config);
  config.output_dir = temp_dir("st_acc3_out");
  const TrackOutputs outputs = cmd_track(manifest, config);
  const Dataset truth = read_dataset(manifest);

  auto mean_error = [&](const std::vector<StatePair>& estimates) {
    double total = 0.0;
    for (const StatePair& t : truth.states) {
      double best = 1e100;
      for (const StatePair& est : estimates)
        best = std::min(best, relative_error(t, est));
      total += best;
    }
    return total / truth.states.size();
  };
  const double init_error = mean_error(outputs.initial_states);
  const double final_error = mean_error(outputs.result.final_states);
  const bool pass = final_error <= 0.5 * init_error;
  report(3, pass, "piecewise stream: mean relative error " + format_double(final_error) +
                      " vs initial " + format_double(init_error) + " (limit 0.5x)");
  fs::remove_all(data_dir);
  fs::remove_all(config.output_dir);
}

// 4. Gradients vs central finite differences.
void criterion4() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> xdist(0.1, 3.0);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5, c = 8;
    const Matrix x =
        Matrix::NullaryExpr(n, c, [&](Eigen::Index, Eigen::Index) { return xdist(rng); });
    std::vector<Matrix> ys = {noise_free_y(random_truth(n, rng), x),
                              noise_free_y(random_truth(n, rng), x)};
    const StateStats stats = batch_stats(ys, 0.9);
    StatePair pair = random_truth(n, rng);
    const int i = trial % n;
    Vector grad_a;
    double grad_b;
    ista_gradients(pair, stats, x, i, grad_a, grad_b);
    int col = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      StatePair plus = pair, minus = pair;
      plus.a(i, j) += h;
      minus.a(i, j) -= h;
      const double fd =
          (smooth_objective(plus, stats, x) - smooth_objective(minus, stats, x)) /
          (2.0 * h);
      worst = std::max(worst,
                       std::abs(grad_a(col++) - fd) / std::max(1.0, std::abs(fd)));
    }
    StatePair plus = pair, minus = pair;
    plus.b(i) += h;
    minus.b(i) -= h;
    const double fd =
        (smooth_objective(plus, stats, x) - smooth_objective(minus, stats, x)) /
        (2.0 * h);
    worst = std::max(worst, std::abs(grad_b - fd) / std::max(1.0, std::abs(fd)));
  }
  report(4, worst <= 1e-5, "gradient vs finite differences, worst relative error " +
                               format_double(worst) + " (limit 1e-5)");
}

// 5. Prox oracle agreement and monotone descent with exact steps.
void criterion5() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> zdist(-2.0, 2.0);
  std::uniform_real_distribution<double> mudist(0.0, 1.0);
  bool prox_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const double z = zdist(rng), mu = mudist(rng);
    double best_v = 0.0, best_f = 1e100;
    for (double v = -2.5; v <= 2.5; v += 1e-4) {
      const double f = 0.5 * (v - z) * (v - z) + mu * std::abs(v);
      if (f < best_f) {
        best_f = f;
        best_v = v;
      }
    }
    if (std::abs(soft_threshold(z, mu) - best_v) > 1e-3) prox_ok = false;
  }

  // 100-interval random stream, one exact-step inner iteration at a time
  std::uniform_real_distribution<double> xdist(0.1, 3.0);
  const int n = 6, c = 9;
  const Matrix x =
      Matrix::NullaryExpr(n, c, [&](Eigen::Index, Eigen::Index) { return xdist(rng); });
  const std::vector<StatePair> truth = {random_truth(n, rng), random_truth(n, rng)};
  TrackerStats stats = TrackerStats::zero(1, n, c);
  StatePair pair = random_truth(n, rng);
  IstaOptions opts;
  opts.lambda_s = 0.3;
  opts.step_rule = StepRule::exact_lipschitz;
  opts.max_inner_iters = 1;
  opts.tol_inner = 1e-30;
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    update_stats(stats, noise_free_y(truth[t % 2], x), 1, 0.97);
    for (int k = 0; k < 3; ++k) {
      const double before = p1_objective(pair, stats.per_state[0], x, opts.lambda_s);
      pair = ista_inner_solve(pair, stats.per_state[0], x, opts);
      const double after = p1_objective(pair, stats.per_state[0], x, opts.lambda_s);
      if (after > before + 1e-10 * std::max(1.0, std::abs(before))) ++violations;
    }
  }
  report(5, prox_ok && violations == 0,
         std::string("prox oracle ") + (prox_ok ? "matched" : "mismatched") + ", " +
             std::to_string(violations) + " descent violations (limit 0)");
}

// 6. Forgetting-free recursion equals the batch statistics.
void criterion6() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5, c = 7, T = 20;
    std::vector<Matrix> ys;
    for (int t = 0; t < T; ++t)
      ys.push_back(Matrix::NullaryExpr(
          n, c, [&](Eigen::Index, Eigen::Index) { return unit(rng); }));
    TrackerStats stats = TrackerStats::zero(1, n, c);
    for (const Matrix& y : ys) update_stats(stats, y, 1, 1.0);
    const StateStats expected = batch_stats(ys, 1.0);
    worst = std::max(worst,
                     (stats.per_state[0].omega - expected.omega).norm() /
                         expected.omega.norm());
    worst = std::max(worst, (stats.per_state[0].ybar - expected.ybar).norm() /
                                expected.ybar.norm());
    worst = std::max(worst, std::abs(stats.per_state[0].alpha - expected.alpha) /
                                expected.alpha);
  }
  report(6, worst <= 1e-10, "recursive vs batch statistics, worst relative error " +
                                format_double(worst) + " (limit 1e-10)");
}

// 7. Identifiability validators.
void criterion7() {
  bool pass = kruskal_rank(Matrix::Identity(5, 5)) == 5;
  Matrix dup(4, 5);
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  dup = Matrix::NullaryExpr(4, 5, [&](Eigen::Index, Eigen::Index) { return unit(rng); });
  dup.col(3) = dup.col(1);
  pass = pass && kruskal_rank(dup) == 1;

  std::uniform_real_distribution<double> xdist(0.1, 3.0);
  std::uniform_real_distribution<double> wdist(0.5, 1.5);
  std::uniform_int_distribution<int> pick(0, 4);
  int unique_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5, c = 7, k = 1;
    StatePair truth;
    truth.a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      int j = pick(rng);
      while (j == i) j = pick(rng);
      truth.a(i, j) = wdist(rng);
    }
    const double rho = spectral_radius_abs(truth.a);
    if (rho > 0) truth.a *= 0.4 / rho;
    truth.b = Vector::NullaryExpr(n, [&](Eigen::Index) { return wdist(rng); });
    const Matrix x =
        Matrix::NullaryExpr(n, c, [&](Eigen::Index, Eigen::Index) { return xdist(rng); });
    const Matrix y =
        (Matrix::Identity(n, n) - truth.a).lu().solve(truth.b.asDiagonal() * x);
    if (verify_sparse_uniqueness(y, x, k)) ++unique_ok;
  }
  pass = pass && unique_ok >= 99;

  const double invertible_fraction = lemma1_empirical(1000, 6, 0.3, 108);
  pass = pass && invertible_fraction == 1.0;
  report(7, pass, "kruskal ranks, sparse uniqueness " + std::to_string(unique_ok) +
                      "/100 (limit 99), invertibility fraction " +
                      format_double(invertible_fraction) + " (limit 1.0)");
}

// 8. Model-order dispersion elbow on 4-state synthetic data.
void criterion8() {
  const std::string data_dir = temp_dir("st_acc8_data");
  ExperimentConfig config = synthetic_config(data_dir, SwitchMode::iid);
  config.generation.n_intervals = 300;
  const std::string manifest = cmd_generate(config);
  config.output_dir = temp_dir("st_acc8_out");
  config.sweep = SweepConfig{"S", {1, 2, 3, 4, 5, 6, 7, 8}};
  const std::vector<SweepRow> rows = cmd_sweep(manifest, config);
  int biggest_drop_at = 0;
  double biggest_drop = -1e300;
  for (size_t i = 1; i < rows.size(); ++i) {
    const double drop = rows[i - 1].dispersion - rows[i].dispersion;
    if (drop > biggest_drop) {
      biggest_drop = drop;
      biggest_drop_at = static_cast<int>(rows[i].value);
    }
  }
  const double d3 = rows[2].dispersion, d4 = rows[3].dispersion;
  const bool pass = biggest_drop_at <= 4 && d4 <= d3 - 0.5;
  report(8, pass, "dispersion elbow at S=" + std::to_string(biggest_drop_at) +
                      " (limit <=4), delta(4)-delta(3) = " + format_double(d4 - d3) +
                      " (limit <=-0.5); the 3-state elbow printed for the real dataset "
                      "is not reproducible here because that dataset is not bundled");
  fs::remove_all(data_dir);
  fs::remove_all(config.output_dir);
}

// 9. Graph statistics on hand-checked fixtures. Published real-data tables are
// reference-only (their dataset is not bundled) and are not gated here.
void criterion9() {
  Matrix cycle = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    cycle(i, (i + 1) % 4) = 1.0;
    cycle((i + 1) % 4, i) = 1.0;
  }
  const GraphStats cs = graph_stats(cycle, 0.5);
  bool pass = cs.avg_clustering_coefficient == 0.0 && cs.diameter == 2 &&
              cs.avg_num_neighbors == 2.0 &&
              std::abs(cs.avg_shortest_path_length - 4.0 / 3.0) < 1e-15 && cs.connected;

  Matrix k4 = Matrix::Ones(4, 4);
  k4.diagonal().setZero();
  const GraphStats ks = graph_stats(k4, 0.5);
  pass = pass && ks.avg_clustering_coefficient == 1.0 && ks.diameter == 1 &&
         ks.avg_num_neighbors == 3.0 && ks.avg_shortest_path_length == 1.0;
  report(9, pass, "4-cycle and K4 statistics match hand values exactly");
}

// 10. Byte-identical reruns.
void criterion10() {
  std::vector<std::string> hashes[2];
  for (int run = 0; run < 2; ++run) {
    const std::string data_dir = temp_dir("st_acc10_data" + std::to_string(run));
    ExperimentConfig config = synthetic_config(data_dir, SwitchMode::iid);
    config.generation.n_nodes = 16;
    config.generation.n_cascades = 20;
    config.generation.n_intervals = 60;
    config.ridge.t_init = 20;
    const std::string manifest = cmd_generate(config);
    config.output_dir = temp_dir("st_acc10_out" + std::to_string(run));
    cmd_track(manifest, config);
    for (const std::string& name :
         {"X.csv", "sigma.csv", "Y_00001.csv", "Y_00060.csv"})
      hashes[run].push_back(sha256_file((fs::path(data_dir) / name).string()));
    for (const std::string& name :
         {"sigma_est.csv", "residuals.csv", "states/A_1.csv", "states/A_4.csv",
          "states/B_1.csv", "error_curve.csv"})
      hashes[run].push_back(sha256_file((fs::path(config.output_dir) / name).string()));
    fs::remove_all(data_dir);
    fs::remove_all(config.output_dir);
  }
  const bool pass = hashes[0] == hashes[1];
  report(10, pass, pass ? "rerun outputs byte-identical (sha256 of 10 files match)"
                        : "rerun outputs differ");
}

}  // namespace

int main() {
  criterion1();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion9();
  criterion10();
  criterion8();
  criterion2();
  criterion3();
  return failures == 0 ? 0 : 1;
}
