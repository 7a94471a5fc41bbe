#pragma once

#include <string>
#include <string_view>

namespace hetfeed {

/// Canonical prompt identity: Unicode NFC followed by trimming surrounding
/// white space. Two prompts group together iff their normalized forms are
/// byte-equal. Throws ValidationError on invalid UTF-8.
std::string normalize_prompt(std::string_view text);

/// Lowercase hex SHA-256 of normalize_prompt(text). Used as the join key
/// between prompts, embedding files and cluster assignments.
std::string prompt_key(std::string_view text);

/// Lowercase hex SHA-256 of raw bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace hetfeed
