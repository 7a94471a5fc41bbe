#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfeed/error.hpp"

namespace hetfeed::jsonl {

using Json = nlohmann::json;

/// Calls `fn(object, line_number)` for every non-blank line of `in`.
/// Lines that are not JSON objects raise ParseError with the line number.
void for_each_object(std::istream& in,
                     const std::function<void(const Json&, std::size_t)>& fn);

/// Writes one compact JSON document per line.
void write_lines(std::ostream& out, const std::vector<Json>& docs);

// Field accessors used by the record parsers. All throw ParseError naming
// the line and field.
const Json& require(const Json& obj, std::string_view field, std::size_t line);
std::string require_string(const Json& obj, std::string_view field,
                           std::size_t line, bool allow_empty = false);
double require_finite(const Json& value, std::string_view field,
                      std::size_t line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace hetfeed::jsonl
