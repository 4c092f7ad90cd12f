#include "switchtrack/cascade_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace switchtrack {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

CascadeEvent parse_csv_row(const std::string& line, int line_no) {
  std::istringstream ls(line);
  std::string node, cascade, ts;
  if (!std::getline(ls, node, ',') || !std::getline(ls, cascade, ',') ||
      !std::getline(ls, ts))
    throw ParseError("events: malformed row at line " + std::to_string(line_no));
  CascadeEvent ev;
  ev.node_id = trim(node);
  ev.cascade_id = trim(cascade);
  try {
    ev.timestamp = std::stoll(trim(ts));
  } catch (const std::exception&) {
    throw ParseError("events: bad timestamp at line " + std::to_string(line_no));
  }
  if (ev.node_id.empty() || ev.cascade_id.empty() || ev.timestamp < 0)
    throw ParseError("events: invalid fields at line " + std::to_string(line_no));
  return ev;
}

CascadeEvent parse_jsonl_row(const std::string& line, int line_no) {
  json j;
  try {
    j = json::parse(line);
    CascadeEvent ev;
    ev.node_id = j.at("node_id");
    ev.cascade_id = j.at("cascade_id");
    ev.timestamp = j.at("timestamp");
    if (ev.node_id.empty() || ev.cascade_id.empty() || ev.timestamp < 0)
      throw ParseError("events: invalid fields at line " + std::to_string(line_no));
    return ev;
  } catch (const json::exception&) {
    throw ParseError("events: malformed JSON at line " + std::to_string(line_no));
  }
}

}  // namespace

std::vector<CascadeEvent> load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open events file: " + path);

  std::vector<CascadeEvent> raw;
  std::string line;
  int line_no = 0;
  bool jsonl = false;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (first_content_line) {
      jsonl = t.front() == '{';
      first_content_line = false;
      if (!jsonl) {
        // headered CSV: skip the node_id,cascade_id,timestamp line
        if (t.rfind("node_id", 0) != 0)
          throw ParseError("events: expected CSV header at line " +
                           std::to_string(line_no));
        continue;
      }
    }
    raw.push_back(jsonl ? parse_jsonl_row(t, line_no) : parse_csv_row(t, line_no));
  }

  // duplicate (node, cascade) pairs keep the earliest timestamp
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<CascadeEvent> events;
  for (const CascadeEvent& ev : raw) {
    const std::string key = ev.node_id + '\x1f' + ev.cascade_id;
    const auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, events.size());
      events.push_back(ev);
    } else if (ev.timestamp < events[it->second].timestamp) {
      events[it->second].timestamp = ev.timestamp;
    }
  }
  return events;
}

FilteredEvents filter_memes(const std::vector<CascadeEvent>& events, int min_infected) {
  if (min_infected < 1)
    throw InvalidInputError("filter_memes: min_infected must be >= 1");

  std::unordered_map<std::string, std::unordered_set<std::string>> cascade_nodes;
  for (const CascadeEvent& ev : events)
    cascade_nodes[ev.cascade_id].insert(ev.node_id);

  FilteredEvents out;
  std::unordered_map<std::string, int> node_index, cascade_index;
  for (const CascadeEvent& ev : events) {
    if (static_cast<int>(cascade_nodes[ev.cascade_id].size()) < min_infected) continue;
    if (!node_index.count(ev.node_id)) {
      node_index.emplace(ev.node_id, static_cast<int>(out.node_ids.size()));
      out.node_ids.push_back(ev.node_id);
    }
    if (!cascade_index.count(ev.cascade_id)) {
      cascade_index.emplace(ev.cascade_id, static_cast<int>(out.cascade_ids.size()));
      out.cascade_ids.push_back(ev.cascade_id);
    }
    out.events.push_back(ev);
  }
  out.n_nodes = static_cast<int>(out.node_ids.size());
  out.n_cascades = static_cast<int>(out.cascade_ids.size());
  return out;
}

std::vector<CascadeSnapshot> build_snapshots(const FilteredEvents& filtered,
                                             int n_intervals,
                                             IntervalMinimum minimum_mode) {
  if (n_intervals < 1)
    throw InvalidInputError("build_snapshots: T must be >= 1");
  if (filtered.events.empty())
    throw DataError("build_snapshots: no events after filtering");

  std::unordered_map<std::string, int> node_index, cascade_index;
  for (int i = 0; i < filtered.n_nodes; ++i) node_index[filtered.node_ids[i]] = i;
  for (int c = 0; c < filtered.n_cascades; ++c)
    cascade_index[filtered.cascade_ids[c]] = c;

  std::int64_t min_u = filtered.events.front().timestamp;
  std::int64_t max_u = min_u;
  for (const CascadeEvent& ev : filtered.events) {
    min_u = std::min(min_u, ev.timestamp);
    max_u = std::max(max_u, ev.timestamp);
  }
  const double surrogate = 2.0 + std::log10(static_cast<double>(std::max<std::int64_t>(max_u, 1)));
  const double span = static_cast<double>(max_u - min_u);

  // half-open [start, end) intervals; the final interval is closed
  const auto interval_of = [&](std::int64_t u) {
    if (span <= 0.0) return 0;
    int t = static_cast<int>((static_cast<double>(u - min_u) / span) * n_intervals);
    return std::min(t, n_intervals - 1);
  };

  std::vector<std::vector<const CascadeEvent*>> by_interval(n_intervals);
  for (const CascadeEvent& ev : filtered.events)
    by_interval[interval_of(ev.timestamp)].push_back(&ev);

  std::vector<CascadeSnapshot> snapshots(n_intervals);
  for (int t = 0; t < n_intervals; ++t) {
    snapshots[t].t = t + 1;
    snapshots[t].y = Matrix::Constant(filtered.n_nodes, filtered.n_cascades, surrogate);
    const auto& evs = by_interval[t];
    if (evs.empty()) continue;

    if (minimum_mode == IntervalMinimum::global) {
      std::int64_t t_min = evs.front()->timestamp;
      for (const CascadeEvent* ev : evs) t_min = std::min(t_min, ev->timestamp);
      for (const CascadeEvent* ev : evs)
        snapshots[t].y(node_index[ev->node_id], cascade_index[ev->cascade_id]) =
            std::log10(static_cast<double>(ev->timestamp - t_min) + 1.0);
    } else {
      std::unordered_map<int, std::int64_t> c_min;
      for (const CascadeEvent* ev : evs) {
        const int c = cascade_index[ev->cascade_id];
        const auto it = c_min.find(c);
        if (it == c_min.end() || ev->timestamp < it->second) c_min[c] = ev->timestamp;
      }
      for (const CascadeEvent* ev : evs) {
        const int c = cascade_index[ev->cascade_id];
        snapshots[t].y(node_index[ev->node_id], c) =
            std::log10(static_cast<double>(ev->timestamp - c_min[c]) + 1.0);
      }
    }
  }
  return snapshots;
}

ExogenousMatrix build_susceptibility(const FilteredEvents& filtered,
                                     const std::map<std::string, int>& category_map,
                                     int n_categories) {
  if (n_categories < 1)
    throw InvalidInputError("build_susceptibility: n_categories must be >= 1");

  std::unordered_map<std::string, int> node_index, cascade_index;
  for (int i = 0; i < filtered.n_nodes; ++i) node_index[filtered.node_ids[i]] = i;
  for (int c = 0; c < filtered.n_cascades; ++c)
    cascade_index[filtered.cascade_ids[c]] = c;

  std::vector<int> cascade_category(filtered.n_cascades);
  for (int c = 0; c < filtered.n_cascades; ++c) {
    const auto it = category_map.find(filtered.cascade_ids[c]);
    if (it == category_map.end())
      throw DataError("build_susceptibility: unmapped cascade id " +
                      filtered.cascade_ids[c]);
    if (it->second < 1 || it->second > n_categories)
      throw InvalidInputError("build_susceptibility: category index out of range for " +
                              filtered.cascade_ids[c]);
    cascade_category[c] = it->second - 1;
  }

  Matrix gamma = Matrix::Zero(filtered.n_nodes, n_categories);
  Vector infections = Vector::Zero(filtered.n_nodes);
  for (const CascadeEvent& ev : filtered.events) {
    const int i = node_index[ev.node_id];
    gamma(i, cascade_category[cascade_index[ev.cascade_id]]) += 1.0;
    infections(i) += 1.0;
  }
  for (int i = 0; i < filtered.n_nodes; ++i) {
    if (infections(i) > 0.0)
      gamma.row(i) /= infections(i);
    else
      gamma.row(i).setConstant(1.0 / n_categories);
  }

  ExogenousMatrix x(filtered.n_nodes, filtered.n_cascades);
  for (int c = 0; c < filtered.n_cascades; ++c)
    x.col(c) = gamma.col(cascade_category[c]);
  return x;
}

void write_id_maps(const std::string& dir, const FilteredEvents& filtered) {
  json j;
  j["nodes"] = filtered.node_ids;
  j["cascades"] = filtered.cascade_ids;
  std::ofstream out(fs::path(dir) / "id_map.json");
  if (!out) throw DataError("cannot write id map in " + dir);
  out << j.dump(2) << '\n';
}

}  // namespace switchtrack
