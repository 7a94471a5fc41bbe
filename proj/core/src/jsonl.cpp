#include "hetfeed/jsonl.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hetfeed::jsonl {

namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

void for_each_object(std::istream& in,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Json doc = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw ParseError(line_no, "", "invalid JSON");
    if (!doc.is_object()) throw ParseError(line_no, "", "expected a JSON object");
    fn(doc, line_no);
  }
}

void write_lines(std::ostream& out, const std::vector<Json>& docs) {
  for (const auto& doc : docs) out << doc.dump() << '\n';
}

const Json& require(const Json& obj, std::string_view field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw ParseError(line, std::string(field), "missing");
  }
  return *it;
}

std::string require_string(const Json& obj, std::string_view field,
                           std::size_t line, bool allow_empty) {
  const Json& v = require(obj, field, line);
  if (!v.is_string()) throw ParseError(line, std::string(field), "expected a string");
  auto s = v.get<std::string>();
  if (!allow_empty && s.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ParseError(line, std::string(field), "must be nonempty");
  }
  return s;
}

double require_finite(const Json& value, std::string_view field,
                      std::size_t line) {
  if (!value.is_number()) throw ParseError(line, std::string(field), "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) throw ParseError(line, std::string(field), "not finite");
  return x;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::runtime, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::runtime, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::runtime, "write failed: " + path.string());
}

}  // namespace hetfeed::jsonl
