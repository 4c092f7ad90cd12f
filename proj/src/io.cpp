#include "switchtrack/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace switchtrack {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "# " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open for reading: " + path);
  std::string header;
  std::getline(in, header);
  Eigen::Index rows = 0, cols = 0;
  {
    std::istringstream hs(header);
    char hash;
    if (!(hs >> hash >> rows >> cols) || hash != '#')
      throw ParseError(path + ": expected '# rows cols' header");
  }
  Matrix m(rows, cols);
  std::string line;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw ParseError(path + ": truncated at row " + std::to_string(i + 1));
    std::istringstream ls(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ','))
        throw ParseError(path + ": short row " + std::to_string(i + 1));
      m(i, j) = std::stod(cell);
    }
  }
  return m;
}

void write_vector_csv(const std::string& path, const Vector& v) {
  write_matrix_csv(path, Matrix(v));
}

Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() != 1) throw ParseError(path + ": expected a single column");
  return m.col(0);
}

void write_int_csv(const std::string& path, const std::vector<int>& v) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "# " << v.size() << " 1\n";
  for (int x : v) out << x << '\n';
}

std::vector<int> read_int_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  std::vector<int> v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = static_cast<int>(m(i, 0));
  return v;
}

void write_manifest(const std::string& dir, const DatasetManifest& manifest) {
  json j;
  j["format_version"] = 1;
  j["n"] = manifest.n;
  j["c"] = manifest.c;
  j["t"] = manifest.t;
  j["s"] = manifest.s;
  j["rng_seed"] = manifest.rng_seed;
  j["x"] = manifest.x_file;
  j["state_a"] = manifest.state_a_files;
  j["state_b"] = manifest.state_b_files;
  j["y"] = manifest.y_files;
  j["sigma"] = manifest.sigma_file;
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + dir);
  out << j.dump(2) << '\n';
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  DatasetManifest m;
  try {
    m.n = j.at("n");
    m.c = j.at("c");
    m.t = j.at("t");
    m.s = j.at("s");
    m.rng_seed = j.at("rng_seed");
    m.x_file = j.at("x");
    m.state_a_files = j.at("state_a").get<std::vector<std::string>>();
    m.state_b_files = j.at("state_b").get<std::vector<std::string>>();
    m.y_files = j.at("y").get<std::vector<std::string>>();
    m.sigma_file = j.value("sigma", "");
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return m;
}

void write_dataset(const std::string& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  DatasetManifest m = dataset.manifest;
  m.n = static_cast<int>(dataset.x.rows());
  m.c = static_cast<int>(dataset.x.cols());
  m.t = static_cast<int>(dataset.snapshots.size());
  m.s = static_cast<int>(dataset.states.size());

  m.x_file = "X.csv";
  write_matrix_csv((fs::path(dir) / m.x_file).string(), dataset.x);

  m.state_a_files.clear();
  m.state_b_files.clear();
  for (std::size_t s = 0; s < dataset.states.size(); ++s) {
    std::string a_file = "state_" + std::to_string(s + 1) + "_a.csv";
    std::string b_file = "state_" + std::to_string(s + 1) + "_b.csv";
    write_matrix_csv((fs::path(dir) / a_file).string(), dataset.states[s].a);
    write_vector_csv((fs::path(dir) / b_file).string(), dataset.states[s].b);
    m.state_a_files.push_back(std::move(a_file));
    m.state_b_files.push_back(std::move(b_file));
  }

  m.y_files.clear();
  for (std::size_t t = 0; t < dataset.snapshots.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "Y_%05zu.csv", t + 1);
    write_matrix_csv((fs::path(dir) / name).string(), dataset.snapshots[t].y);
    m.y_files.emplace_back(name);
  }

  if (!dataset.sigma.sigma.empty()) {
    m.sigma_file = "sigma.csv";
    write_int_csv((fs::path(dir) / m.sigma_file).string(), dataset.sigma.sigma);
  } else {
    m.sigma_file.clear();
  }
  write_manifest(dir, m);
}

Dataset read_dataset(const std::string& manifest_path) {
  Dataset d;
  d.manifest = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();

  d.x = read_matrix_csv((dir / d.manifest.x_file).string());
  for (std::size_t s = 0; s < d.manifest.state_a_files.size(); ++s) {
    StatePair pair;
    pair.a = read_matrix_csv((dir / d.manifest.state_a_files[s]).string());
    pair.b = read_vector_csv((dir / d.manifest.state_b_files[s]).string());
    pair.state_id = static_cast<int>(s + 1);
    d.states.push_back(std::move(pair));
  }
  d.snapshots.resize(d.manifest.y_files.size());
  for (std::size_t t = 0; t < d.manifest.y_files.size(); ++t) {
    d.snapshots[t].y = read_matrix_csv((dir / d.manifest.y_files[t]).string());
    d.snapshots[t].t = static_cast<int>(t + 1);
  }
  if (!d.manifest.sigma_file.empty())
    d.sigma.sigma = read_int_csv((dir / d.manifest.sigma_file).string());
  return d;
}

}  // namespace switchtrack
