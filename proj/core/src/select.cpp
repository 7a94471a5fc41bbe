#include "hetfeed/select.hpp"

#include <algorithm>
#include <cmath>

#include "hetfeed/embed.hpp"
#include "hetfeed/error.hpp"
#include "hetfeed/rng.hpp"
#include "hetfeed/text.hpp"

namespace hetfeed {

using nlohmann::json;

void SelectionConfig::validate() const {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  if (k < 1) throw ValidationError("k must be >= 1");
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
}

double SelectionReport::achieved_fraction() const {
  if (total_in == 0) return 1.0;
  return static_cast<double>(total_out) / static_cast<double>(total_in);
}

json to_json(const SelectionReport& r) {
  auto counts = [](const StratumCounts& c) {
    const double frac = c.in == 0 ? 1.0 : static_cast<double>(c.out) / static_cast<double>(c.in);
    return json{{"in", c.in}, {"out", c.out}, {"fraction", frac}};
  };
  json clusters = json::array();
  for (const auto& [cluster, c] : r.per_cluster) {
    json j = counts(c);
    j["cluster"] = cluster;
    clusters.push_back(std::move(j));
  }
  json sources = json::object();
  for (const auto& [source, c] : r.per_source) sources[source] = counts(c);
  json strata = json::array();
  for (const auto& [key, c] : r.per_stratum) {
    json j = counts(c);
    j["cluster"] = key.first;
    j["source_id"] = key.second;
    strata.push_back(std::move(j));
  }
  return json{{"fraction", r.fraction},
              {"total_in", r.total_in},
              {"total_out", r.total_out},
              {"achieved_fraction", r.achieved_fraction()},
              {"per_cluster", std::move(clusters)},
              {"per_source", std::move(sources)},
              {"per_stratum", std::move(strata)}};
}

std::size_t stratum_quota(double fraction, std::size_t n) {
  if (n == 0) return 0;
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  const auto q = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(q, n);
}

Selection select_pairs(std::span<const UnifiedPair> pairs,
                       const std::map<std::string, int>& assignments,
                       const SelectionConfig& cfg) {
  cfg.validate();

  Selection out;
  out.report.fraction = cfg.fraction;
  out.report.total_in = pairs.size();

  std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
  std::vector<int> cluster_of(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    auto it = assignments.find(prompt_key(p.prompt));
    if (it == assignments.end()) {
      throw ValidationError("pair '" + p.pair_id + "' has no cluster assignment");
    }
    if (!cfg.policies.contains(p.source_id)) {
      throw ValidationError("no filter policy for source '" + p.source_id + "'");
    }
    cluster_of[i] = it->second;
    strata[{it->second, p.source_id}].push_back(i);
  }

  std::vector<bool> keep(pairs.size(), false);
  for (auto& [key, members] : strata) {
    const auto& [cluster, source] = key;
    const FilterPolicy policy = cfg.policies.at(source);
    std::vector<std::size_t> kept;
    switch (policy) {
      case FilterPolicy::passthrough:
        kept = members;
        break;
      case FilterPolicy::quality: {
        for (std::size_t i : members) {
          if (!pairs[i].quality) {
            throw ValidationError("pair '" + pairs[i].pair_id +
                                  "' has no quality under the quality policy");
          }
        }
        kept = members;
        std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
          return *pairs[a].quality > *pairs[b].quality;
        });
        kept.resize(stratum_quota(cfg.fraction, members.size()));
        break;
      }
      case FilterPolicy::random: {
        kept = members;
        Rng rng(derive_seed(cfg.seed, seeded_hash64(source, static_cast<std::uint64_t>(cluster))));
        for (std::size_t i = kept.size(); i > 1; --i) {
          std::swap(kept[i - 1], kept[rng.below(i)]);
        }
        kept.resize(stratum_quota(cfg.fraction, members.size()));
        break;
      }
      default:
        throw ValidationError("unknown filter policy for source '" + source + "'");
    }
    for (std::size_t i : kept) keep[i] = true;

    const StratumCounts counts{members.size(), kept.size()};
    out.report.per_stratum[key] = counts;
    auto& pc = out.report.per_cluster[cluster];
    pc.in += counts.in;
    pc.out += counts.out;
    auto& ps = out.report.per_source[source];
    ps.in += counts.in;
    ps.out += counts.out;
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!keep[i]) continue;
    UnifiedPair p = pairs[i];
    p.cluster_id = cluster_of[i];
    out.pairs.push_back(std::move(p));
  }
  out.report.total_out = out.pairs.size();
  return out;
}

}  // namespace hetfeed
