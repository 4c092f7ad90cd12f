#pragma once

#include <string>
#include <vector>

#include "switchtrack/types.hpp"

namespace switchtrack {

/// CSV with a "# rows cols" header line; values at 17 significant digits so
/// doubles round-trip exactly.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

void write_vector_csv(const std::string& path, const Vector& v);
Vector read_vector_csv(const std::string& path);

void write_int_csv(const std::string& path, const std::vector<int>& v);
std::vector<int> read_int_csv(const std::string& path);

/// Dataset manifest: states, X, per-interval Y files, and sigma, all bound by
/// a JSON file in the dataset directory.
struct DatasetManifest {
  int n = 0, c = 0, t = 0, s = 0;
  std::uint64_t rng_seed = 0;
  std::string x_file;
  std::vector<std::string> state_a_files;
  std::vector<std::string> state_b_files;
  std::vector<std::string> y_files;
  std::string sigma_file;  // empty when ground truth is unavailable
};

void write_manifest(const std::string& dir, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);

struct Dataset {
  std::vector<StatePair> states;  // empty when ground truth is unavailable
  ExogenousMatrix x;
  std::vector<CascadeSnapshot> snapshots;
  SwitchSequence sigma;
  DatasetManifest manifest;
};

/// Writes X, states, snapshots, and sigma plus manifest.json under `dir`.
void write_dataset(const std::string& dir, const Dataset& dataset);
Dataset read_dataset(const std::string& manifest_path);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace switchtrack
