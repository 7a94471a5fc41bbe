#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hetfeed::eval {

/// A pro-stereotype / anti-stereotype sentence pair sharing one referent.
struct PairedBiasItem {
  std::string item_id;
  std::string sentence_pro;
  std::string sentence_anti;
  std::string pronoun;
  std::array<std::string, 2> candidates;
  std::string correct_referent;
  std::vector<std::string> cluster_words;
};

/// Model measurements for one side of an item.
struct SideProbe {
  std::map<std::string, double> candidate_logprobs;
  std::map<std::string, double> cluster_logprobs;
  std::vector<double> next_token_dist;
  std::string generation;
};

struct ProbeDump {
  std::string item_id;
  SideProbe pro;
  SideProbe anti;
};

struct MetricReport {
  double bias_abs = 0.0;
  double bias_signed = 0.0;
  double bias_entropy = 0.0;  // nats
  double bias_cluster = 0.0;
  double accuracy = 0.0;
  double similarity = 0.0;
  std::size_t n_items = 0;
};

inline constexpr double kKlSmoothing = 1e-12;
inline constexpr std::size_t kMaxGenerationWords = 10;

PairedBiasItem parse_item(const nlohmann::json& j, std::size_t line);
ProbeDump parse_dump(const nlohmann::json& j, std::size_t line);
std::vector<PairedBiasItem> read_items(std::istream& in);
std::vector<ProbeDump> read_dumps(std::istream& in);

nlohmann::json to_json(const PairedBiasItem& item);
nlohmann::json to_json(const ProbeDump& dump);
nlohmann::json to_json(const MetricReport& report);

/// `{sentence} "{pronoun}" refers to: `
std::string build_prompt(std::string_view sentence, std::string_view pronoun);

/// Items paired with their dumps, in item order. Construction checks that
/// every item has a dump and that each dump covers the item's candidates and
/// cluster words.
class EvalSet {
 public:
  EvalSet(std::vector<PairedBiasItem> items, std::span<const ProbeDump> dumps);

  std::size_t size() const noexcept { return items_.size(); }
  const PairedBiasItem& item(std::size_t i) const { return items_[i]; }
  const ProbeDump& dump(std::size_t i) const { return dumps_[i]; }

 private:
  std::vector<PairedBiasItem> items_;
  std::vector<ProbeDump> dumps_;
};

struct BiasResult {
  double bias_abs = 0.0;
  double bias_signed = 0.0;
};

BiasResult bias_metric(const EvalSet& set);
double bias_cluster_metric(const EvalSet& set);
double bias_entropy_metric(const EvalSet& set);
double accuracy_metric(const EvalSet& set);
double similarity_metric(const EvalSet& set);
MetricReport evaluate(const EvalSet& set);

/// KL(p || q) in nats after adding kKlSmoothing to every entry and
/// renormalizing both vectors.
double smoothed_kl(std::span<const double> p, std::span<const double> q);

/// Truncates at the first of . , ! ? ; : and after ten words, then returns
/// the candidate whose first whole-word, case-insensitive occurrence comes
/// earliest.
std::optional<std::string> extract_referent(
    std::string_view generation, const std::array<std::string, 2>& candidates);

/// Fixed-width table with the columns Bias, Bias (Entropy), Bias (Cluster),
/// Accuracy, Similarity.
std::string format_table(const MetricReport& report, std::string_view label);

}  // namespace hetfeed::eval
