#pragma once

// Deterministic fixture generators shared by the unit and acceptance tests.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "hetfeed/cluster.hpp"
#include "hetfeed/embed.hpp"
#include "hetfeed/ingest.hpp"
#include "hetfeed/select.hpp"
#include "hetfeed/text.hpp"
#include "hetfeed/unify.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "hetfeed") {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto candidate = base / (tag + "-" + std::to_string(rd()) + std::to_string(attempt));
      if (std::filesystem::create_directory(candidate)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline const std::array<std::vector<std::string>, 10>& topics() {
  static const std::array<std::vector<std::string>, 10> t = {{
      {"gpu", "train", "model", "memory", "batch", "cuda", "tensor"},
      {"recipe", "bake", "flour", "oven", "sugar", "dough", "bread"},
      {"travel", "beach", "hotel", "flight", "vacation", "island", "tour"},
      {"doctor", "nurse", "hospital", "patient", "medicine", "clinic", "health"},
      {"garden", "plant", "soil", "water", "seed", "flower", "tomato"},
      {"guitar", "music", "chord", "song", "melody", "band", "piano"},
      {"stock", "market", "invest", "fund", "bond", "price", "trade"},
      {"soccer", "goal", "team", "match", "league", "coach", "player"},
      {"python", "code", "function", "loop", "compile", "bug", "debug"},
      {"planet", "star", "orbit", "galaxy", "telescope", "moon", "comet"},
  }};
  return t;
}

/// A prompt drawn from one of ten vocabularies, made unique by `serial`.
inline std::string topical_prompt(std::mt19937_64& rng, std::size_t topic,
                                  std::size_t serial) {
  const auto& words = topics()[topic % topics().size()];
  std::string p = "Question " + std::to_string(serial) + ":";
  for (int w = 0; w < 6; ++w) p += " " + words[rng() % words.size()];
  return p + "?";
}

/// `n_prompts` prompts with between `min_resp` and `max_resp` responses each,
/// toxicity uniform in [0, 1) plus a constant spam label.
inline std::vector<hetfeed::ScoredResponseRecord> scored_records(
    std::size_t n_prompts, std::size_t min_resp, std::size_t max_resp,
    std::uint64_t seed, const std::string& source_id = "oasst") {
  std::mt19937_64 rng(seed);
  std::vector<hetfeed::ScoredResponseRecord> out;
  for (std::size_t i = 0; i < n_prompts; ++i) {
    const std::string prompt = topical_prompt(rng, i, 1000 + i);
    const std::size_t n = min_resp + rng() % (max_resp - min_resp + 1);
    for (std::size_t r = 0; r < n; ++r) {
      const double tox = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      out.push_back({prompt, "Answer " + std::to_string(r) + " to prompt " + std::to_string(i),
                     {{"toxicity", tox}, {"spam", 0.0}}, source_id});
    }
  }
  return out;
}

/// Records shuffled so responses to one prompt are interleaved with others.
inline std::vector<hetfeed::ScoredResponseRecord> interleave(
    std::vector<hetfeed::ScoredResponseRecord> recs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = recs.size(); i > 1; --i) std::swap(recs[i - 1], recs[rng() % i]);
  return recs;
}

inline std::vector<hetfeed::BinaryPreferenceRecord> binary_records(
    std::size_t n, std::uint64_t seed, const std::string& source_id = "winogrande") {
  std::mt19937_64 rng(seed);
  std::vector<hetfeed::BinaryPreferenceRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({topical_prompt(rng, i * 7 + 3, i), "option A" + std::to_string(i),
                   "option B" + std::to_string(i), source_id});
  }
  return out;
}

struct MixedFixture {
  std::filesystem::path config;
  std::filesystem::path out_dir;
};

/// Writes a 120-record binary passthrough source, an 80-prompt scored
/// quality source (2-4 responses per prompt) and a run config using the
/// hashed embedding provider.
inline MixedFixture write_mixed_fixture(const std::filesystem::path& dir, double fraction,
                                        std::uint64_t seed = 7,
                                        bool include_binary = true) {
  using nlohmann::json;
  {
    std::ofstream out(dir / "binary.jsonl");
    for (const auto& r : binary_records(120, 11)) out << hetfeed::to_json(r).dump() << '\n';
  }
  {
    std::ofstream out(dir / "scored.jsonl");
    for (const auto& r : interleave(scored_records(80, 2, 4, 23), 5)) {
      out << hetfeed::to_json(r).dump() << '\n';
    }
  }
  json sources = json::array();
  if (include_binary) {
    sources.push_back({{"source_id", "winogrande"},
                       {"supervision", "binary"},
                       {"filter_policy", "passthrough"},
                       {"path", "binary.jsonl"}});
  }
  sources.push_back({{"source_id", "oasst"},
                     {"supervision", "scored"},
                     {"quality_label", "toxicity"},
                     {"label_direction", "lower_is_better"},
                     {"filter_policy", "quality"},
                     {"path", "scored.jsonl"}});
  json cfg = {{"sources", sources},
              {"embedding", {{"provider", "hash"}, {"dim", 384}, {"seed", 0}}},
              {"selection",
               {{"fraction", fraction}, {"k", 10}, {"restarts", 10}, {"seed", seed}}},
              {"output_dir", "out"}};
  write_text(dir / "config.json", cfg.dump(2));
  return {dir / "config.json", dir / "out"};
}

struct MixedPairs {
  std::vector<hetfeed::UnifiedPair> pairs;
  std::map<std::string, int> assignments;
  std::map<std::string, hetfeed::FilterPolicy> policies;
};

/// 120 passthrough binary pairs followed by 80 quality-scored pairs, with
/// prompts clustered (hashed embeddings, k-means) into `k` clusters.
inline MixedPairs mixed_pairs(std::uint64_t seed = 7, std::size_t k = 10,
                              std::size_t restarts = 10) {
  using namespace hetfeed;
  SourceDescriptor bin{"winogrande", Supervision::binary, std::nullopt,
                       LabelDirection::lower_is_better, FilterPolicy::passthrough};
  SourceDescriptor sc{"oasst", Supervision::scored, "toxicity",
                      LabelDirection::lower_is_better, FilterPolicy::quality};
  std::vector<std::pair<SourceDescriptor, std::vector<UnifiedPair>>> sources{
      {bin, convert_binary_source(binary_records(120, 11), bin)},
      {sc, convert_scored_source(interleave(scored_records(80, 2, 4, 23), 5), sc).pairs}};
  MixedPairs out;
  out.pairs = union_sources(sources).pairs;
  std::vector<std::string> prompts;
  for (const auto& p : out.pairs) prompts.push_back(p.prompt);
  auto model = kmeans_fit(HashEmbeddingProvider(kDefaultEmbeddingDim, 0).embed(prompts),
                          {k, restarts, seed, 100});
  out.assignments = model.assignments;
  out.policies = {{"winogrande", FilterPolicy::passthrough}, {"oasst", FilterPolicy::quality}};
  return out;
}

/// Training settings per stage, transcribed by hand: hyperparameters then
/// LoRA rank / alpha / dropout.
inline std::map<std::string, std::pair<nlohmann::json, nlohmann::json>> expected_manifests() {
  using nlohmann::json;
  return {
      {"sft",
       {json{{"learning_rate", 1e-5}, {"max_steps", 5000}, {"epochs", 1},
             {"optimizer", "adamw"}, {"lr_scheduler", "cosine"}, {"max_text_length", 512},
             {"batch_size", 4}, {"gradient_accumulation_steps", 1}, {"weight_decay", 0.05}},
        json{{"rank", 16}, {"alpha", 32}, {"dropout", 0.05}}}},
      {"reward",
       {json{{"learning_rate", 2e-5}, {"epochs", 1}, {"optimizer", "adamw"},
             {"lr_scheduler", "linear"}, {"max_text_length", 512}, {"batch_size", 4},
             {"gradient_accumulation_steps", 1}, {"weight_decay", 0.001}},
        json{{"rank", 8}, {"alpha", 32}, {"dropout", 0.1}}}},
      {"rlhf",
       {json{{"learning_rate", 1.41e-5}, {"max_steps", 20000}, {"epochs", 4},
             {"min_generation_length", 32}, {"max_generation_length", 128},
             {"ppo_minibatch_size", 1}, {"batch_size", 32}, {"gradient_accumulation_steps", 4}},
        json{{"rank", 16}, {"alpha", 32}, {"dropout", 0.05}}}},
  };
}

/// Hand-read referents for the generations in eval_dumps.jsonl.
inline std::map<std::string, oracle::HandLabel> eval_hand_labels() {
  return {{"i01", {"doctor", "doctor"}},       {"i02", {"nurse", "patient"}},
          {"i03", {std::nullopt, "clerk"}},    {"i04", {"baker", "lawyer"}},
          {"i05", {"secretary", "secretary"}}, {"i06", {std::nullopt, "farmer"}},
          {"i07", {std::nullopt, "cashier"}},  {"i08", {"driver", "driver"}},
          {"i09", {"editor", "cook"}},         {"i10", {"guard", std::nullopt}}};
}

inline std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(HETFEED_FIXTURE_DIR) / name;
}

}  // namespace fixture
