#include "hetfeed/embed.hpp"

#include <cmath>
#include <fstream>

#include "hetfeed/error.hpp"
#include "hetfeed/jsonl.hpp"
#include "hetfeed/rng.hpp"
#include "hetfeed/text.hpp"

namespace hetfeed {

using nlohmann::json;

namespace {

constexpr double kRenormalizeTolerance = 1e-3;

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

EmbeddingMap load_embeddings(std::istream& in,
                             const std::set<std::string>& expected_keys) {
  EmbeddingMap all;
  std::size_t dim = 0;
  jsonl::for_each_object(in, [&](const json& obj, std::size_t line) {
    EmbeddingVector v;
    v.prompt_key = jsonl::require_string(obj, "prompt_key", line);
    const json& values = jsonl::require(obj, "values", line);
    if (!values.is_array() || values.empty()) {
      throw ParseError(line, "values", "expected a nonempty array");
    }
    v.values.reserve(values.size());
    for (const auto& x : values) v.values.push_back(jsonl::require_finite(x, "values", line));

    if (dim == 0) dim = v.dim();
    if (v.dim() != dim) {
      throw ParseError(line, "values", "dimension " + std::to_string(v.dim()) +
                                           " differs from " + std::to_string(dim));
    }
    const double norm = l2_norm(v.values);
    if (std::abs(norm - 1.0) > kRenormalizeTolerance) {
      throw ParseError(line, "values", "L2 norm " + std::to_string(norm) +
                                           " is not within 1e-3 of 1");
    }
    if (std::abs(norm - 1.0) > 1e-12) {
      for (double& x : v.values) x /= norm;
    }
    auto key = v.prompt_key;
    if (!all.emplace(std::move(key), std::move(v)).second) {
      throw ParseError(line, "prompt_key", "duplicate key");
    }
  });

  if (expected_keys.empty()) return all;

  EmbeddingMap out;
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& key : expected_keys) {
    auto it = all.find(key);
    if (it == all.end()) {
      if (n_missing++ < 20) missing += (missing.empty() ? "" : ", ") + key;
      continue;
    }
    out.insert(*it);
  }
  if (n_missing > 0) {
    throw ValidationError("embedding file lacks " + std::to_string(n_missing) +
                          " expected prompt(s): " + missing +
                          (n_missing > 20 ? ", ..." : ""));
  }
  return out;
}

void write_embeddings(std::ostream& out, const EmbeddingMap& embeddings) {
  for (const auto& [key, v] : embeddings) {
    out << json{{"prompt_key", key}, {"values", v.values}}.dump() << '\n';
  }
}

std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed) {
  // FNV-1a keyed by the seed, then a SplitMix64 finalizer.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

std::vector<std::string> hash_terms(std::string_view text) {
  std::vector<std::string> terms;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool term_char = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                           (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (term_char) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      terms.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) terms.push_back(std::move(cur));
  return terms;
}

EmbeddingVector hash_embed(std::string_view prompt, std::size_t dim,
                           std::uint64_t seed) {
  if (dim < 2) throw ValidationError("embedding dim must be >= 2");
  const std::string normalized = normalize_prompt(prompt);

  EmbeddingVector v;
  v.prompt_key = sha256_hex(normalized);
  v.values.assign(dim, 0.0);
  for (const auto& term : hash_terms(normalized)) {
    const std::uint64_t h = seeded_hash64(term, seed);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v.values[h % dim] += sign;
  }
  const double norm = l2_norm(v.values);
  if (norm == 0.0) {
    v.values[0] = 1.0;
  } else {
    if (std::abs(norm - 1.0) > 1e-12) {
      for (double& x : v.values) x /= norm;
    }
  }
  return v;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ < 2) throw ValidationError("embedding dim must be >= 2");
}

EmbeddingMap HashEmbeddingProvider::embed(std::span<const std::string> prompts) const {
  EmbeddingMap out;
  for (const auto& p : prompts) {
    auto v = hash_embed(p, dim_, seed_);
    auto key = v.prompt_key;
    out.try_emplace(std::move(key), std::move(v));
  }
  return out;
}

FileEmbeddingProvider::FileEmbeddingProvider(std::filesystem::path path)
    : path_(std::move(path)) {}

EmbeddingMap FileEmbeddingProvider::embed(std::span<const std::string> prompts) const {
  std::set<std::string> keys;
  for (const auto& p : prompts) keys.insert(prompt_key(p));
  std::ifstream in(path_);
  if (!in) throw Error(ErrorKind::runtime, "cannot open " + path_.string());
  if (keys.empty()) return {};
  return load_embeddings(in, keys);
}

}  // namespace hetfeed
