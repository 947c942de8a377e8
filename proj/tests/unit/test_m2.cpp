#include <cmath>
#include <random>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/m2.hpp"
#include "cgec/unicode.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cgec;

namespace {

double pct(double ratio) { return std::round(ratio * 10000.0) / 100.0; }

std::map<std::string, std::vector<GoldAnnotation>> single_gold(
    const std::vector<std::vector<Edit>>& per_sentence) {
  std::map<std::string, std::vector<GoldAnnotation>> gold;
  for (std::size_t i = 0; i < per_sentence.size(); ++i) {
    GoldAnnotation a{sentence_id_for(i), 0, {}};
    for (const auto& e : per_sentence[i]) a.edits.push_back({e, "S"});
    gold[a.sentence_id].push_back(a);
  }
  return gold;
}

}  // namespace

TEST_CASE("F0.5 reproduces the reference word-level rows") {
  CHECK(std::abs(pct(f_beta(0.2231, 0.1014, 0.5)) - 17.99) < 1e-9);
  CHECK(std::abs(pct(f_beta(0.4242, 0.1687, 0.5)) - 32.56) < 1e-9);
  CHECK(f_beta(0.2231, 0.1014, 0.5) == doctest::Approx(0.1799).epsilon(0.0001 / 0.1799));
  CHECK(f_beta(0.2231, 0.1014, 0.5) == doctest::Approx(oracle::fhalf(0.2231, 0.1014)));
}

TEST_CASE("F-beta edge cases") {
  for (double p : {0.0, 0.3, 0.5, 1.0}) {
    for (double beta : {0.5, 1.0, 2.0}) CHECK(f_beta(p, p, beta) == doctest::Approx(p));
  }
  CHECK(f_beta(0.7, 0.0, 0.5) == 0.0);
  CHECK(f_beta(0.0, 0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(f_beta(0.5, 0.5, 0.0), ValidationError);
  CHECK_THROWS_AS(f_beta(0.5, 0.5, -1.0), ValidationError);
  CHECK_THROWS_AS(f_beta(1.5, 0.5, 0.5), ValidationError);
}

TEST_CASE("vacuous precision and recall") {
  CHECK(precision({0, 0, 3}) == 1.0);
  CHECK(recall({0, 2, 0}) == 1.0);
  CHECK(precision({1, 3, 0}) == doctest::Approx(0.25));
  CHECK(recall({1, 0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("edit matching") {
  const std::vector<Edit> none;
  CHECK(match_edits(none, none) == Counts{0, 0, 0});
  const std::vector<Edit> del{{15, 17, ""}};
  CHECK(match_edits(del, del) == Counts{1, 0, 0});
  const std::vector<Edit> sys{{6, 8, "加快"}};
  const std::vector<Edit> gold{{6, 8, "加速"}};
  CHECK(match_edits(sys, gold) == Counts{0, 1, 1});
}

TEST_CASE("matching compares replacements after NFC") {
  const std::vector<Edit> composed{{0, 1, "\xC3\xA9"}};       // U+00E9
  const std::vector<Edit> decomposed{{0, 1, "e\xCC\x81"}};    // e + U+0301
  CHECK(match_edits(composed, decomposed) == Counts{1, 0, 0});
}

TEST_CASE("matching agrees with exhaustive pairing") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> pos(0, 6), len(0, 1), rep(0, 2);
  const std::vector<std::string> reps{"", "x", "y"};
  auto random_edits = [&] {
    std::vector<Edit> edits;
    std::size_t at = 0;
    for (int k = 0; k < 4; ++k) {
      const std::size_t start = at + static_cast<std::size_t>(pos(rng) % 3);
      const std::size_t end = start + static_cast<std::size_t>(len(rng));
      std::string r = reps[static_cast<std::size_t>(rep(rng))];
      if (start == end && r.empty()) r = "z";
      edits.push_back({start, end, r});
      at = end + 1;
    }
    return edits;
  };
  for (int i = 0; i < 500; ++i) {
    const auto sys = random_edits();
    const auto gold = random_edits();
    const auto expected = oracle::brute_force_match(sys, gold);
    const Counts got = match_edits(sys, gold);
    CHECK(got.tp == expected.tp);
    CHECK(got.fp == expected.fp);
    CHECK(got.fn == expected.fn);
  }
}

TEST_CASE("reference selection") {
  const std::vector<AnnotatorCounts> one{{3, {0, 1, 1}}};
  CHECK(select_reference(one, {}) == 3);
  const std::vector<AnnotatorCounts> two{{0, {1, 0, 0}}, {1, {0, 1, 1}}};
  CHECK(select_reference(two, {}) == 0);
  const std::vector<AnnotatorCounts> swapped{{1, {0, 1, 1}}, {0, {1, 0, 0}}};
  CHECK(select_reference(swapped, {}) == 0);
  const std::vector<AnnotatorCounts> tied{{4, {1, 1, 0}}, {2, {1, 1, 0}}};
  CHECK(select_reference(tied, {}) == 2);
}

TEST_CASE("selection uses cumulative counts") {
  // Alone, annotator 1 (0,0,0) scores a vacuous 1.0 but cannot beat an
  // extra true positive once the corpus already has a miss.
  const std::vector<AnnotatorCounts> options{{0, {1, 0, 1}}, {1, {0, 0, 0}}};
  CHECK(select_reference(options, {0, 0, 0}) == 1);
  CHECK(select_reference(options, {0, 0, 5}) == 0);
}

TEST_CASE("M2 parsing") {
  const std::string chars =
      "S 这座卫星城的人口估计超过一百万左右。\n"
      "A 15 17|||R|||-NONE-|||REQUIRED|||-NONE-|||0\n"
      "\n"
      "S 今天天气好。\n"
      "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n";
  const auto char_sentences = parse_m2(chars, GranularityMode::Char);
  REQUIRE(char_sentences.size() == 2);
  CHECK(char_sentences[0].annotations[0].plain_edits() == std::vector<Edit>{{15, 17, ""}});
  CHECK(char_sentences[1].annotations[0].edits.empty());

  const std::string m2 =
      "S 甲 乙\n"
      "A 0 1|||R|||-NONE-|||REQUIRED|||-NONE-|||0\n"
      "\n"
      "S 今天 天气 好 。\n"
      "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n"
      "\n"
      "S 西湖区 正 全面 提升 区域 的 步伐 。\n"
      "A 3 4|||S|||加 快|||REQUIRED|||-NONE-|||0\n"
      "A 3 4|||S|||加速|||REQUIRED|||-NONE-|||1\n";
  const auto sentences = parse_m2(m2, GranularityMode::Word);
  REQUIRE(sentences.size() == 3);
  CHECK(sentences[0].annotations[0].plain_edits() == std::vector<Edit>{{0, 1, ""}});
  CHECK(sentences[1].annotations[0].edits.empty());
  CHECK(sentences[2].annotations.size() == 2);
  CHECK(sentences[2].annotations[0].edits[0].edit.replacement == "加快");
  CHECK(sentences[2].annotations[1].annotator_id == 1);
  CHECK(sentences[2].id == "2");
}

TEST_CASE("M2 syntax errors carry line numbers") {
  try {
    parse_m2("S 甲乙\nA 0 1|||R|||-NONE-|||REQUIRED\n", GranularityMode::Char);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_m2("A 0 1|||R|||x|||REQUIRED|||-NONE-|||0\n", GranularityMode::Char),
                  ParseError);
  CHECK_THROWS_AS(parse_m2("S 甲乙\nA 0 9|||R|||x|||REQUIRED|||-NONE-|||0\n",
                           GranularityMode::Char),
                  ParseError);
  CHECK_THROWS_AS(parse_m2("S 甲乙丙\nA 0 2|||R|||x|||REQUIRED|||-NONE-|||0\n"
                           "A 1 3|||R|||y|||REQUIRED|||-NONE-|||0\n",
                           GranularityMode::Char),
                  ParseError);
}

TEST_CASE("M2 write then parse is the identity") {
  const std::string m2 =
      "S 甲乙丙丁\n"
      "A 0 1|||S|||戊|||REQUIRED|||-NONE-|||0\n"
      "A 2 2|||M|||己|||REQUIRED|||-NONE-|||0\n"
      "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||1\n"
      "\n";
  const auto parsed = parse_m2(m2, GranularityMode::Char);
  CHECK(write_m2(parsed) == m2);
}

TEST_CASE("perfect hypotheses score 100 and unchanged sources score 100/0/0") {
  const std::vector<std::string> sources{"这座卫星城的人口估计超过一百万左右。",
                                         "西湖区正全面提升区域产城融合发展的步伐。"};
  const std::vector<std::string> targets{"这座卫星城的人口估计超过一百万。",
                                         "西湖区正全面加快区域产城融合发展的步伐。"};
  const auto gold = single_gold({{{15, 17, ""}}, {{6, 8, "加快"}}});
  const auto perfect = score_corpus(sources, targets, gold, Granularity::chars());
  CHECK(perfect.totals == Counts{2, 0, 0});
  CHECK(perfect.f_half == 1.0);

  const auto lazy = score_corpus(sources, sources, gold, Granularity::chars());
  CHECK(lazy.totals == Counts{0, 0, 2});
  CHECK(lazy.precision == 1.0);
  CHECK(lazy.recall == 0.0);
  CHECK(lazy.f_half == 0.0);
}

TEST_CASE("no-error gold with no system edits is neutral") {
  const std::vector<std::string> sources{"今天天气好。"};
  const auto gold = single_gold({{}});
  const auto report = score_corpus(sources, sources, gold, Granularity::chars());
  CHECK(report.totals == Counts{0, 0, 0});
  CHECK(report.f_half == 1.0);
}

TEST_CASE("two-sentence corpus totals equal the exhaustive matcher") {
  const std::vector<std::string> sources{"abcdef", "甲乙丙丁"};
  const std::vector<std::string> hyps{"axcdf", "甲丙丁戊"};
  const std::vector<std::vector<Edit>> gold_edits{{{1, 2, "x"}, {4, 5, ""}, {5, 6, "g"}},
                                                  {{1, 2, ""}}};
  const auto report =
      score_corpus(sources, hyps, single_gold(gold_edits), Granularity::chars());
  oracle::Tally total;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto sys = extract_edits(sources[i], hyps[i], Granularity::chars());
    const auto t = oracle::brute_force_match(sys, gold_edits[i]);
    total.tp += t.tp;
    total.fp += t.fp;
    total.fn += t.fn;
  }
  CHECK(report.totals.tp == total.tp);
  CHECK(report.totals.fp == total.fp);
  CHECK(report.totals.fn == total.fn);
}

TEST_CASE("missing gold and length mismatch are errors") {
  const std::vector<std::string> one{"甲乙"};
  const std::vector<std::string> two{"甲乙", "丙丁"};
  CHECK_THROWS_AS(score_corpus(one, two, single_gold({{}}), Granularity::chars()),
                  ValidationError);
  try {
    score_corpus(two, two, single_gold({{}}), Granularity::chars());
    FAIL("expected missing gold");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("sentence 1") != std::string::npos);
  }
}

TEST_CASE("spurious edits never raise precision, dropped matches never raise recall") {
  const std::vector<std::string> sources{"甲乙丙丁戊"};
  const auto gold = single_gold({{{1, 2, "子"}, {3, 4, "丑"}}});
  auto score = [&](const std::string& hyp) {
    const std::vector<std::string> h{hyp};
    return score_corpus(sources, h, gold, Granularity::chars());
  };
  const auto base = score("甲子丙丑戊");
  const auto spurious = score("甲子丙丑寅");
  CHECK(spurious.precision <= base.precision);
  const auto dropped = score("甲子丙丁戊");
  CHECK(dropped.recall <= base.recall);
}

TEST_CASE("parallel extraction gives the same report") {
  std::vector<std::string> sources, hyps;
  std::vector<std::vector<Edit>> gold_edits;
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::string s = "甲乙丙丁戊己庚辛";
    std::string h = s;
    if (rng() % 2) h = "甲乙丙丁戊己庚";
    sources.push_back(s);
    hyps.push_back(h);
    gold_edits.push_back({{7, 8, ""}});
  }
  const auto gold = single_gold(gold_edits);
  const auto serial = score_corpus(sources, hyps, gold, Granularity::chars());
  const auto parallel = score_corpus(sources, hyps, gold, Granularity::chars(), {8});
  CHECK(serial.totals == parallel.totals);
  CHECK(serial.per_sentence == parallel.per_sentence);
  CHECK(format_report(serial) == format_report(parallel));
}

TEST_CASE("report formatting") {
  const std::vector<std::string> sources{"甲乙"};
  const std::vector<std::string> hyps{"甲"};
  const auto report = score_corpus(sources, hyps, single_gold({{{1, 2, ""}}}),
                                   Granularity::chars());
  const std::string text = format_report(report);
  CHECK(text.find("P/R/F0.5  : 100.00/100.00/100.00") != std::string::npos);
  const auto json = report_to_json(report);
  CHECK(json["tp"] == 1);
  CHECK(json["f0.5"] == doctest::Approx(100.0));
  CHECK(json["per_sentence"][0]["annotator"] == 0);
}
