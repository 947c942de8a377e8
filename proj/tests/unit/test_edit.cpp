#include <random>

#include "cgec/edit.hpp"
#include "cgec/error.hpp"
#include "cgec/unicode.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cgec;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<Token> char_tokens(std::string_view s) { return segment(s, Granularity::chars()); }

std::string random_string(std::mt19937& rng, std::size_t max_len) {
  static constexpr char kAlphabet[] = "abcde";
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, 4);
  std::string s(len(rng), 'a');
  for (char& c : s) c = kAlphabet[sym(rng)];
  return s;
}

}  // namespace

TEST_CASE("char segmentation is one token per code point") {
  const auto tokens = char_tokens("左右");
  CHECK(surfaces(tokens) == std::vector<std::string>{"左", "右"});
  CHECK(tokens[1].char_start == 1);
  CHECK(tokens[1].char_end == 2);
  CHECK_THROWS_AS(segment("", Granularity::chars()), ValidationError);
}

TEST_CASE("word segmentation is forward maximum match") {
  const std::vector<std::string> words{"西湖区", "全面"};
  const auto g = Granularity::words(std::make_shared<const Lexicon>(words));
  CHECK(surfaces(segment("西湖区正全面", g)) ==
        std::vector<std::string>{"西湖区", "正", "全面"});
  const auto tokens = segment("西湖区正全面", g);
  CHECK(tokens[2].char_start == 4);
  CHECK(tokens[2].char_end == 6);
}

TEST_CASE("word mode needs a lexicon or pre-segmented input") {
  Granularity bare;
  bare.mode = GranularityMode::Word;
  CHECK_THROWS_AS(segment("西湖区", bare), ConfigError);
  const auto pre = segment("西湖区 正 全面", Granularity::presegmented_words());
  CHECK(surfaces(pre) == std::vector<std::string>{"西湖区", "正", "全面"});
  CHECK(pre[2].char_start == 4);
}

TEST_CASE("segments tile the sentence") {
  const std::vector<std::string> words{"卫星城", "人口", "超过", "一百万"};
  const auto g = Granularity::words(std::make_shared<const Lexicon>(words));
  const std::string s = "这座卫星城的人口估计超过一百万左右。";
  const auto tokens = segment(s, g);
  CHECK(join_surfaces(tokens) == s);
  std::size_t pos = 0;
  for (const auto& t : tokens) {
    CHECK(t.char_start == pos);
    CHECK(t.char_end > t.char_start);
    pos = t.char_end;
  }
  CHECK(pos == code_point_count(s));
}

TEST_CASE("alignment examples") {
  const std::vector<std::string> abc{"a", "b", "c"};
  const auto same = align(abc, abc);
  CHECK(same.cost == 0);
  for (const auto& step : same.steps) CHECK(step.op == AlignOp::Match);

  const std::vector<std::string> axc{"a", "x", "c"};
  const auto sub = align(abc, axc);
  CHECK(sub.cost == 1);
  REQUIRE(sub.steps.size() == 3);
  CHECK(sub.steps[0].op == AlignOp::Match);
  CHECK(sub.steps[1].op == AlignOp::Substitute);
  CHECK(sub.steps[2].op == AlignOp::Match);

  const std::vector<std::string> none;
  const std::vector<std::string> ab{"a", "b"};
  const auto ins = align(none, ab);
  CHECK(ins.cost == 2);
  REQUIRE(ins.steps.size() == 2);
  CHECK(ins.steps[0].op == AlignOp::Insert);
  CHECK(ins.steps[1].op == AlignOp::Insert);
}

TEST_CASE("alignment cost agrees with exhaustive search on short strings") {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::string a = random_string(rng, 5);
    const std::string b = random_string(rng, 5);
    std::vector<std::string> ta, tb;
    for (char c : a) ta.emplace_back(1, c);
    for (char c : b) tb.emplace_back(1, c);
    const std::u32string ua(a.begin(), a.end()), ub(b.begin(), b.end());
    CHECK(align(ta, tb).cost == oracle::brute_force_distance(ua, ub));
  }
}

TEST_CASE("redundant 左右 yields one deletion") {
  const std::string src = "这座卫星城的人口估计超过一百万左右。";
  const std::string tgt = "这座卫星城的人口估计超过一百万。";
  const auto edits = extract_edits(src, tgt, Granularity::chars());
  const auto expected = oracle::single_region(decode_utf8(src), decode_utf8(tgt));
  REQUIRE(edits.size() == 1);
  CHECK(edits[0].start == expected.start);
  CHECK(edits[0].end == expected.end);
  CHECK(edits[0] == Edit{15, 17, ""});
  CHECK(edits[0].kind() == EditKind::Delete);
}

TEST_CASE("提升 to 加快 yields one substitution") {
  const std::string src = "西湖区正全面提升区域产城融合发展的步伐。";
  const std::string tgt = "西湖区正全面加快区域产城融合发展的步伐。";
  const auto edits = extract_edits(src, tgt, Granularity::chars());
  const auto expected = oracle::single_region(decode_utf8(src), decode_utf8(tgt));
  REQUIRE(edits.size() == 1);
  CHECK(edits[0] == Edit{expected.start, expected.end, encode_utf8(expected.replacement)});
  CHECK(edits[0] == Edit{6, 8, "加快"});
  CHECK(edits[0].kind() == EditKind::Substitute);
}

TEST_CASE("identical sentences have no edits") {
  CHECK(extract_edits("今天很好。", "今天很好。", Granularity::chars()).empty());
}

TEST_CASE("a matched token splits edits") {
  const auto edits = extract_edits("abcde", "xbyde", Granularity::chars());
  REQUIRE(edits.size() == 2);
  CHECK(edits[0] == Edit{0, 1, "x"});
  CHECK(edits[1] == Edit{2, 3, "y"});
}

TEST_CASE("word-level edits index words") {
  const std::vector<std::string> words{"西湖区", "全面", "提升", "加快", "区域", "步伐"};
  const auto g = Granularity::words(std::make_shared<const Lexicon>(words));
  const auto edits = extract_edits("西湖区正全面提升区域的步伐。", "西湖区正全面加快区域的步伐。", g);
  REQUIRE(edits.size() == 1);
  CHECK(edits[0] == Edit{3, 4, "加快"});
}

TEST_CASE("edit kinds follow the span and replacement") {
  CHECK(make_edit(2, 2, "x").kind() == EditKind::Insert);
  CHECK(make_edit(2, 3, "").kind() == EditKind::Delete);
  CHECK(make_edit(2, 3, "x").kind() == EditKind::Substitute);
  CHECK_THROWS_AS(make_edit(3, 2, "x"), ValidationError);
  CHECK_THROWS_AS(make_edit(2, 2, ""), ValidationError);
}

TEST_CASE("random pairs reconstruct and are minimal") {
  std::mt19937 rng(20230815);
  for (int i = 0; i < 1000; ++i) {
    const std::string src = random_string(rng, 10);
    const std::string tgt = random_string(rng, 10);
    if (src.empty() || tgt.empty()) continue;
    const auto edits = extract_edits(src, tgt, Granularity::chars());
    const auto tokens = char_tokens(src);
    CHECK(apply_edits(tokens, edits) == tgt);
    std::size_t edited = 0;
    for (const auto& e : edits) {
      edited += std::max(e.end - e.start, code_point_count(e.replacement));
    }
    CHECK(edited == oracle::levenshtein(src, tgt));
    CHECK(extract_edits(src, tgt, Granularity::chars()) == edits);
  }
}
