#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hetfeed {

inline constexpr std::size_t kDefaultEmbeddingDim = 384;

struct EmbeddingVector {
  std::string prompt_key;
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

using EmbeddingMap = std::map<std::string, EmbeddingVector>;

/// Reads `{"prompt_key", "values"}` lines. Vectors whose L2 norm is within
/// 1e-3 of one are renormalized; anything further off is rejected. When
/// `expected_keys` is nonempty the result holds exactly those keys and any
/// absent key is an error.
EmbeddingMap load_embeddings(std::istream& in,
                             const std::set<std::string>& expected_keys);

void write_embeddings(std::ostream& out, const EmbeddingMap& embeddings);

/// Signed feature hashing of the prompt's lowercase alphanumeric terms,
/// L2-normalized. A prompt with no terms maps to e_0.
EmbeddingVector hash_embed(std::string_view prompt, std::size_t dim,
                           std::uint64_t seed);

/// Seeded 64-bit term hash used by hash_embed.
std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed);

/// Lowercased terms split on runs of non-alphanumeric ASCII. Bytes >= 0x80
/// are treated as term characters so UTF-8 words stay whole.
std::vector<std::string> hash_terms(std::string_view text);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One vector per distinct prompt, keyed by prompt_key.
  virtual EmbeddingMap embed(std::span<const std::string> prompts) const = 0;
};

class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  HashEmbeddingProvider(std::size_t dim, std::uint64_t seed);
  EmbeddingMap embed(std::span<const std::string> prompts) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Precomputed vectors, e.g. from a sentence-transformer export.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(std::filesystem::path path);
  EmbeddingMap embed(std::span<const std::string> prompts) const override;

 private:
  std::filesystem::path path_;
};

}  // namespace hetfeed
