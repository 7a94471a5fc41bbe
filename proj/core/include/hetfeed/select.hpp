#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfeed/ingest.hpp"
#include "hetfeed/unify.hpp"

namespace hetfeed {

struct SelectionConfig {
  double fraction = 1.0;
  std::size_t k = 10;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::map<std::string, FilterPolicy> policies;  // source_id -> policy

  void validate() const;
};

struct StratumCounts {
  std::size_t in = 0;
  std::size_t out = 0;

  bool operator==(const StratumCounts&) const = default;
};

struct SelectionReport {
  double fraction = 1.0;
  std::map<int, StratumCounts> per_cluster;
  std::map<std::string, StratumCounts> per_source;
  std::map<std::pair<int, std::string>, StratumCounts> per_stratum;
  std::size_t total_in = 0;
  std::size_t total_out = 0;

  double achieved_fraction() const;
};

nlohmann::json to_json(const SelectionReport& r);

/// Number of pairs a quality or random stratum of size n keeps:
/// ceil(fraction * n), never zero for a nonempty stratum.
std::size_t stratum_quota(double fraction, std::size_t n);

struct Selection {
  std::vector<UnifiedPair> pairs;
  SelectionReport report;
};

/// Top fraction per (cluster, source) stratum. `assignments` maps prompt_key
/// to cluster. Output keeps the input's global order with cluster_id set.
Selection select_pairs(std::span<const UnifiedPair> pairs,
                       const std::map<std::string, int>& assignments,
                       const SelectionConfig& cfg);

}  // namespace hetfeed
