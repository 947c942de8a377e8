#include <numeric>

#include "cgec/corpus.hpp"
#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace cgec;

namespace {

ParallelPair make_pair(std::string id, std::string bad, std::string good,
                       std::optional<ErrorCode> type = std::nullopt) {
  ParallelPair p;
  p.id = std::move(id);
  p.ungrammatical = std::move(bad);
  p.grammatical = std::move(good);
  p.error_type = type;
  return p;
}

std::vector<ParallelPair> labeled(std::initializer_list<std::pair<ErrorCode, std::size_t>> counts) {
  std::vector<ParallelPair> pairs;
  for (auto [code, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = std::string(to_string(code)) + "-" + std::to_string(i);
      pairs.push_back(make_pair(id, "错" + id, "对" + id, code));
    }
  }
  return pairs;
}

}  // namespace

TEST_CASE("clue classes split the six error types three and three") {
  for (ErrorCode c : {ErrorCode::RC, ErrorCode::SC, ErrorCode::IC}) {
    CHECK(clue_class(c) == ClueClass::WithClues);
  }
  for (ErrorCode c : {ErrorCode::IWO, ErrorCode::IL, ErrorCode::MC}) {
    CHECK(clue_class(c) == ClueClass::WithoutClues);
  }
  for (ErrorCode c : kAllErrorCodes) CHECK(parse_error_code(to_string(c)) == c);
  CHECK_FALSE(parse_error_code("rc"));
}

TEST_CASE("tsv line with RC label") {
  const auto pairs = parse_pairs(
      "这座卫星城的人口估计超过一百万左右。\t这座卫星城的人口估计超过一百万。\tRC\n",
      PairFormat::Tsv);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].error_type == ErrorCode::RC);
  CHECK(pairs[0].id == "000001");
  CHECK(pairs[0].source == PairSource::HumanAnnotated);
}

TEST_CASE("empty input loads no pairs") {
  CHECK(parse_pairs("", PairFormat::Tsv).empty());
  CHECK(parse_pairs("", PairFormat::Jsonl).empty());
  TempDir dir;
  write_file_atomic(dir / "empty.jsonl", "");
  CHECK(load_pairs(dir / "empty.jsonl", PairFormat::Jsonl).empty());
}

TEST_CASE("malformed records name their line") {
  const std::string tsv = "甲\t乙\n同一句。\t同一句。\n";
  try {
    parse_pairs(tsv, PairFormat::Tsv, "x.tsv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("x.tsv") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_pairs("{\"ungrammatical\": \"a\"}\n", PairFormat::Jsonl), ParseError);
  CHECK_THROWS_AS(parse_pairs("not json\n", PairFormat::Jsonl), ParseError);
  CHECK_THROWS_AS(parse_pairs("a\tb\tXX\n", PairFormat::Tsv), ParseError);
}

TEST_CASE("duplicate ids are rejected") {
  const std::string jsonl =
      "{\"id\":\"a\",\"ungrammatical\":\"甲\",\"grammatical\":\"乙\"}\n"
      "{\"id\":\"a\",\"ungrammatical\":\"丙\",\"grammatical\":\"丁\"}\n";
  CHECK_THROWS_AS(parse_pairs(jsonl, PairFormat::Jsonl), ParseError);
}

TEST_CASE("pair invariants") {
  CHECK_THROWS_AS(validate_pair(make_pair("a", "", "x")), ValidationError);
  CHECK_THROWS_AS(validate_pair(make_pair("a", "x", "x")), ValidationError);
  auto aug = make_pair("a", "x", "y");
  aug.source = PairSource::Augmented;
  CHECK_THROWS_AS(validate_pair(aug), ValidationError);
  aug.parent_id = "p";
  CHECK_NOTHROW(validate_pair(aug));
  auto orphan = make_pair("b", "x", "y");
  orphan.parent_id = "p";
  CHECK_THROWS_AS(validate_pair(orphan), ValidationError);

  std::vector<ParallelPair> set{aug};
  CHECK_THROWS_AS(validate_dataset(set), ValidationError);
  set.insert(set.begin(), make_pair("p", "甲", "乙"));
  CHECK_NOTHROW(validate_dataset(set));
}

TEST_CASE("save then load is the identity for both formats") {
  std::vector<ParallelPair> pairs{
      make_pair("p1", "这次网络故障的原因是由服务器故障引起的。", "这次网络故障的原因是服务器故障。",
                ErrorCode::SC),
      make_pair("p2", "他说\"好\"。", "他说：\"好\"。"),
  };
  pairs[0].source = PairSource::RuleSynthesized;
  auto child = make_pair("p1-aug1", "这次交换机故障的原因是由服务器故障引起的。",
                         "这次交换机故障的原因是服务器故障。", ErrorCode::SC);
  child.source = PairSource::Augmented;
  child.parent_id = "p1";
  pairs.push_back(child);

  TempDir dir;
  for (PairFormat format : {PairFormat::Jsonl, PairFormat::Tsv}) {
    const auto path = dir / (format == PairFormat::Tsv ? "p.tsv" : "p.jsonl");
    save_pairs(pairs, path, format);
    CHECK(load_pairs(path, format) == pairs);
  }
  save_pairs(std::vector<ParallelPair>{}, dir / "none.jsonl", PairFormat::Jsonl);
  CHECK(read_file(dir / "none.jsonl").empty());
}

TEST_CASE("tabs cannot be written to tsv") {
  const std::vector<ParallelPair> pairs{make_pair("a", "有\t制表符", "没有制表符")};
  try {
    serialize_pairs(pairs, PairFormat::Tsv);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("jsonl") != std::string::npos);
  }
  CHECK_NOTHROW(serialize_pairs(pairs, PairFormat::Jsonl));
}

TEST_CASE("unwritable path surfaces as an I/O error") {
  TempDir dir;
  const std::vector<ParallelPair> pairs{make_pair("a", "甲", "乙")};
  CHECK_THROWS_AS(save_pairs(pairs, dir / "missing" / "x.jsonl", PairFormat::Jsonl), IoError);
  CHECK_THROWS_AS(load_pairs(dir / "nope.jsonl", PairFormat::Jsonl), IoError);
}

TEST_CASE("stats of an empty corpus") {
  const auto stats = compute_stats({});
  CHECK(stats.total == 0);
  for (ErrorCode c : kAllErrorCodes) {
    CHECK(stats.per_type.at(c).count == 0);
    CHECK(stats.per_type.at(c).percent() == "0.00");
  }
}

TEST_CASE("4 RC and 6 SC give 40.00 and 60.00") {
  const auto stats = compute_stats(labeled({{ErrorCode::RC, 4}, {ErrorCode::SC, 6}}));
  CHECK(stats.total == 10);
  CHECK(stats.per_type.at(ErrorCode::RC).percent() == "40.00");
  CHECK(stats.per_type.at(ErrorCode::SC).percent() == "60.00");
  CHECK(stats.per_type.at(ErrorCode::IC).percent() == "0.00");
}

TEST_CASE("percentages round half up") {
  // 1/8 = 12.5 %, 1/16 = 6.25 %, 1/32 = 3.125 % -> 3.13
  const auto stats = compute_stats(labeled({{ErrorCode::RC, 1}, {ErrorCode::SC, 2},
                                            {ErrorCode::IC, 29}}));
  CHECK(stats.per_type.at(ErrorCode::RC).percent() == "3.13");
  CHECK(stats.per_type.at(ErrorCode::SC).percent() == "6.25");
  CHECK(stats.per_type.at(ErrorCode::IC).percent() == "90.63");
  const auto thirds = compute_stats(labeled({{ErrorCode::RC, 1}, {ErrorCode::SC, 1},
                                             {ErrorCode::IC, 1}}));
  CHECK(thirds.per_type.at(ErrorCode::RC).percent() == "33.33");
}

TEST_CASE("unlabeled pairs get their own bucket") {
  auto pairs = labeled({{ErrorCode::MC, 3}});
  pairs.push_back(make_pair("u", "甲", "乙"));
  const auto stats = compute_stats(pairs);
  CHECK(stats.total == 4);
  CHECK(stats.unlabeled.count == 1);
  CHECK(stats.unlabeled.percent() == "25.00");
  CHECK(stats.per_type.at(ErrorCode::MC).percent() == "75.00");
  const auto json = stats_to_json(stats);
  CHECK(json["per_type"]["MC"]["count"] == 3);
  CHECK(json["unlabeled"]["percentage"] == doctest::Approx(25.0));
}
