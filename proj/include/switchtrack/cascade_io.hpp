#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "switchtrack/types.hpp"

namespace switchtrack {

struct CascadeEvent {
  std::string node_id;
  std::string cascade_id;
  std::int64_t timestamp = 0;  // Unix hours
};

enum class IntervalMinimum { global, per_cascade };

struct PreprocessConfig {
  int n_intervals = 180;
  int min_infected = 100;  // meme threshold
  int n_categories = 0;
  std::map<std::string, int> category_map;  // cascade id -> 1-based category
  IntervalMinimum interval_minimum = IntervalMinimum::global;
};

/// Parses JSONL or headered CSV (node_id,cascade_id,timestamp). Duplicate
/// (node, cascade) pairs keep the earliest timestamp.
std::vector<CascadeEvent> load_events(const std::string& path);

struct FilteredEvents {
  std::vector<CascadeEvent> events;
  std::vector<std::string> node_ids;     // dense index -> original id
  std::vector<std::string> cascade_ids;  // dense index -> original id
  int n_nodes = 0;
  int n_cascades = 0;
};

/// Keeps cascades infecting >= min_infected distinct nodes, then re-indexes
/// the surviving nodes and cascades densely, stable by first appearance.
FilteredEvents filter_memes(const std::vector<CascadeEvent>& events, int min_infected);

/// Splits the observation span into T equal-width intervals and maps each
/// infection time u to log10(u - min + 1) against the interval minimum; the
/// +1 hour offset keeps the transform finite at the minimizer. Entries not
/// infected within the interval get the surrogate 2 + log10(max u).
std::vector<CascadeSnapshot> build_snapshots(const FilteredEvents& filtered,
                                             int n_intervals,
                                             IntervalMinimum minimum_mode =
                                                 IntervalMinimum::global);

/// x_ic = gamma_ik for c in category k, where gamma_ik is the fraction of
/// node i's infections coming from category-k cascades. Uninfected nodes get
/// the uniform 1/n_categories row.
ExogenousMatrix build_susceptibility(const FilteredEvents& filtered,
                                     const std::map<std::string, int>& category_map,
                                     int n_categories);

/// Persists the node/cascade id maps alongside a dataset.
void write_id_maps(const std::string& dir, const FilteredEvents& filtered);

}  // namespace switchtrack
