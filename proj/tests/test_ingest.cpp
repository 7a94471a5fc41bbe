#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "hetfeed/error.hpp"
#include "hetfeed/ingest.hpp"

using namespace hetfeed;

namespace {

SourceDescriptor binary_desc(std::string id = "wg") {
  return {std::move(id), Supervision::binary, std::nullopt,
          LabelDirection::lower_is_better, FilterPolicy::passthrough};
}

SourceDescriptor scored_desc(std::string id = "oasst") {
  return {std::move(id), Supervision::scored, "toxicity",
          LabelDirection::lower_is_better, FilterPolicy::quality};
}

}  // namespace

TEST_CASE("binary dataset: worked example parses intact") {
  std::istringstream in(
      R"({"prompt": "The box was still visible after James tried his best to manage the wrapper on it. James should have used the _ that is small.", "chosen": "box", "rejected": "wrapper"})"
      "\n");
  auto recs = parse_binary_dataset(in, binary_desc());
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].prompt.starts_with("The box was still visible"));
  CHECK(recs[0].chosen == "box");
  CHECK(recs[0].rejected == "wrapper");
  CHECK(recs[0].source_id == "wg");
}

TEST_CASE("binary dataset: empty stream and blank lines") {
  std::istringstream empty("");
  CHECK(parse_binary_dataset(empty, binary_desc()).empty());

  std::istringstream blanks("\n  \n{\"prompt\":\"p\",\"chosen\":\"a\",\"rejected\":\"b\"}\n\n");
  CHECK(parse_binary_dataset(blanks, binary_desc()).size() == 1);
}

TEST_CASE("binary dataset: errors name line and field") {
  std::istringstream missing(
      "{\"prompt\":\"p\",\"chosen\":\"a\",\"rejected\":\"b\"}\n"
      "{\"prompt\":\"p\",\"chosen\":\"a\"}\n");
  try {
    parse_binary_dataset(missing, binary_desc());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "rejected");
  }

  std::istringstream same("{\"prompt\":\"p\",\"chosen\":\"a\",\"rejected\":\"a\"}\n");
  CHECK_THROWS_AS(parse_binary_dataset(same, binary_desc()), ParseError);

  std::istringstream not_json("{\"prompt\": oops}\n");
  try {
    parse_binary_dataset(not_json, binary_desc());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  std::istringstream empty_field("{\"prompt\":\"\",\"chosen\":\"a\",\"rejected\":\"b\"}\n");
  CHECK_THROWS_AS(parse_binary_dataset(empty_field, binary_desc()), ParseError);

  std::istringstream wrong_type("{\"prompt\":\"p\",\"chosen\":3,\"rejected\":\"b\"}\n");
  CHECK_THROWS_AS(parse_binary_dataset(wrong_type, binary_desc()), ParseError);
}

TEST_CASE("scored dataset: worked example keeps label values") {
  std::istringstream in(
      R"({"prompt": "Which affordable GPU would you recommend to train a language model?", "response": "It heavily depends on the size...", "scores": {"toxicity": 0.00038284, "spam": 0}})"
      "\n");
  auto recs = parse_scored_dataset(in, scored_desc());
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].response == "It heavily depends on the size...");
  CHECK(recs[0].scores.at("toxicity") == 0.00038284);
  CHECK(recs[0].scores.at("spam") == 0.0);
  CHECK(recs[0].scores.size() == 2);
}

TEST_CASE("scored dataset: shared prompts are not grouped here") {
  std::istringstream in(
      "{\"prompt\":\"p\",\"response\":\"a\",\"scores\":{\"toxicity\":0.1}}\n"
      "{\"prompt\":\"p\",\"response\":\"b\",\"scores\":{\"toxicity\":0.2}}\n");
  auto recs = parse_scored_dataset(in, scored_desc());
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].response == "a");
  CHECK(recs[1].response == "b");
}

TEST_CASE("scored dataset: validation errors") {
  std::istringstream empty_scores("{\"prompt\":\"p\",\"response\":\"a\",\"scores\":{}}\n");
  CHECK_THROWS_AS(parse_scored_dataset(empty_scores, scored_desc()), ParseError);

  std::istringstream no_scores("{\"prompt\":\"p\",\"response\":\"a\"}\n");
  CHECK_THROWS_AS(parse_scored_dataset(no_scores, scored_desc()), ParseError);

  std::istringstream overflow("{\"prompt\":\"p\",\"response\":\"a\",\"scores\":{\"t\":1e999}}\n");
  CHECK_THROWS_AS(parse_scored_dataset(overflow, scored_desc()), ParseError);

  std::istringstream non_numeric("{\"prompt\":\"p\",\"response\":\"a\",\"scores\":{\"t\":\"high\"}}\n");
  CHECK_THROWS_AS(parse_scored_dataset(non_numeric, scored_desc()), ParseError);

  std::istringstream wrong_kind("{\"prompt\":\"p\",\"response\":\"a\",\"scores\":{\"t\":0}}\n");
  CHECK_THROWS_AS(parse_scored_dataset(wrong_kind, binary_desc()), ValidationError);
}

TEST_CASE("property: parse is order-preserving and lossless") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto records = fixture::interleave(fixture::scored_records(15, 1, 4, seed), seed + 1);
    std::string text;
    for (const auto& r : records) text += to_json(r).dump() + "\n";
    std::istringstream in(text);
    auto parsed = parse_scored_dataset(in, scored_desc());
    REQUIRE(parsed == records);
    std::string again;
    for (const auto& r : parsed) again += to_json(r).dump() + "\n";
    CHECK(again == text);
  }
  auto bin = fixture::binary_records(30, 3, "wg");
  std::string text;
  for (const auto& r : bin) text += to_json(r).dump() + "\n";
  std::istringstream in(text);
  CHECK(parse_binary_dataset(in, binary_desc()) == bin);
}

TEST_CASE("validate_sources reports every violation") {
  SUBCASE("duplicate id") {
    std::vector<SourceDescriptor> descs{binary_desc("a"), binary_desc("a")};
    auto v = validate_sources(descs);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("duplicate") != std::string::npos);
  }
  SUBCASE("quality source with its label on every record is ok") {
    std::vector<SourceDescriptor> descs{scored_desc()};
    ScoredRecordsBySource recs{{"oasst", fixture::scored_records(5, 2, 3, 1)}};
    CHECK(validate_sources(descs, recs).empty());
  }
  SUBCASE("label missing from some records names them") {
    std::vector<SourceDescriptor> descs{scored_desc()};
    auto records = fixture::scored_records(4, 2, 2, 1);
    records[1].scores.erase("toxicity");
    records[6].scores.erase("toxicity");
    ScoredRecordsBySource recs{{"oasst", records}};
    auto v = validate_sources(descs, recs);
    REQUIRE(v.size() == 2);
    CHECK(v[0].message.find("record 2") != std::string::npos);
    CHECK(v[1].message.find("record 7") != std::string::npos);
  }
  SUBCASE("descriptor inconsistencies") {
    auto bin_with_label = binary_desc("b1");
    bin_with_label.quality_label = "toxicity";
    auto bin_quality = binary_desc("b2");
    bin_quality.filter_policy = FilterPolicy::quality;
    auto scored_no_label = scored_desc("s1");
    scored_no_label.quality_label.reset();
    auto empty_id = binary_desc("");
    std::vector<SourceDescriptor> descs{bin_with_label, bin_quality, scored_no_label, empty_id};
    CHECK(validate_sources(descs).size() == 4);
  }
}

TEST_CASE("descriptor JSON round trip") {
  auto d = scored_desc();
  d.label_direction = LabelDirection::higher_is_better;
  CHECK(source_descriptor_from_json(to_json(d)) == d);
  CHECK_THROWS_AS(parse_filter_policy("sometimes"), ValidationError);
}
