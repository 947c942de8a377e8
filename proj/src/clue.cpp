#include "cgec/clue.hpp"

#include <set>

#include <unicode/regex.h>
#include <unicode/unistr.h>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/log.hpp"
#include "json.hpp"

namespace cgec {
namespace {

constexpr std::string_view kStandardPrompt =
    "请生成{n}个存在“{error_type}”类语法错误的中文病句。要求：每个句子都必须"
    "同时使用“{clue_a}”和“{clue_b}”，错误正是由二者同时出现造成的；句子要通顺"
    "自然，贴近母语者的表达习惯；每行只写一个句子，按“1. 句子”的格式编号，"
    "不要输出任何解释。";

icu::UnicodeString to_icu(std::string_view text) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

std::string from_icu(const icu::UnicodeString& text) {
  std::string out;
  text.toUTF8String(out);
  return out;
}

// Rejects lookaround, inline flags, named groups, backreferences and
// possessive quantifiers.
void check_dialect(std::string_view pattern, std::string_view what) {
  bool in_class = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    const char next = i + 1 < pattern.size() ? pattern[i + 1] : '\0';
    if (c == '\\') {
      if ((next >= '1' && next <= '9') || next == 'k') {
        throw ValidationError(std::string(what) + ": backreferences are not supported");
      }
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[') {
      in_class = true;
      if (next == ']' || next == '^') ++i;  // literal ']' right after '[' or '[^'
      continue;
    }
    if (c == '(' && next == '?') {
      throw ValidationError(std::string(what) + ": '(?' constructs are not supported");
    }
    if ((c == '*' || c == '+' || c == '?' || c == '}') && next == '+') {
      throw ValidationError(std::string(what) + ": possessive quantifiers are not supported");
    }
  }
}

void check_template(std::string_view text, int groups, std::string_view what) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\') {
      ++i;
      continue;
    }
    if (text[i] != '$') continue;
    if (i + 1 >= text.size() || text[i + 1] < '0' || text[i + 1] > '9') {
      throw ValidationError(std::string(what) +
                            ": '$' must be followed by a group number (use \\$ for a literal)");
    }
    const int group = text[i + 1] - '0';
    if (group > groups) {
      throw ValidationError(std::string(what) + ": template references group $" +
                            std::to_string(group) + " but the pattern has " +
                            std::to_string(groups));
    }
    ++i;
  }
}

std::unique_ptr<icu::RegexPattern> compile_pattern(std::string_view pattern,
                                                   std::string_view what) {
  if (pattern.empty()) throw ValidationError(std::string(what) + ": empty pattern");
  check_dialect(pattern, what);
  UParseError parse_error;
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::RegexPattern> compiled(
      icu::RegexPattern::compile(to_icu(pattern), 0, parse_error, status));
  if (U_FAILURE(status)) {
    throw ValidationError(std::string(what) + ": pattern does not compile (" +
                          u_errorName(status) + " at offset " +
                          std::to_string(parse_error.offset) + ")");
  }
  return compiled;
}

int group_count(const icu::RegexPattern& pattern) {
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::RegexMatcher> matcher(pattern.matcher(status));
  if (U_FAILURE(status)) return 0;
  return matcher->groupCount();
}

std::optional<std::string> replace_first(const icu::RegexPattern& pattern,
                                         const icu::UnicodeString& replacement,
                                         std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString input = to_icu(text);
  std::unique_ptr<icu::RegexMatcher> matcher(pattern.matcher(input, status));
  if (U_FAILURE(status)) throw Error("cannot create regex matcher");
  if (!matcher->find(status)) return std::nullopt;
  matcher->reset();
  const icu::UnicodeString result = matcher->replaceFirst(replacement, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("regex replacement failed: ") + u_errorName(status));
  }
  return from_icu(result);
}

std::string required_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(std::string("rule needs string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

struct ClueRule::Compiled {
  std::unique_ptr<icu::RegexPattern> corrupt;
  icu::UnicodeString corrupt_template;
  std::unique_ptr<icu::RegexPattern> repair;
  icu::UnicodeString repair_template;
};

ClueRule ClueRule::compile(ClueRuleSpec spec) {
  const std::string label = "rule '" + spec.id + "'";
  if (spec.id.empty()) throw ValidationError("rule without an id");
  if (clue_class(spec.error_type) != ClueClass::WithClues) {
    throw ValidationError(label + ": error type " +
                          std::string(to_string(spec.error_type)) +
                          " has no clues; only RC, SC and IC rules are allowed");
  }
  auto compiled = std::make_shared<Compiled>();
  compiled->corrupt = compile_pattern(spec.corrupt_pattern, label + " corrupt_pattern");
  compiled->repair = compile_pattern(spec.repair_pattern, label + " repair_pattern");
  check_template(spec.corrupt_template, group_count(*compiled->corrupt),
                 label + " corrupt_template");
  check_template(spec.repair_template, group_count(*compiled->repair),
                 label + " repair_template");
  compiled->corrupt_template = to_icu(spec.corrupt_template);
  compiled->repair_template = to_icu(spec.repair_template);
  return ClueRule(std::move(spec), std::move(compiled));
}

std::optional<std::string> ClueRule::corrupt(std::string_view grammatical) const {
  return replace_first(*compiled_->corrupt, compiled_->corrupt_template, grammatical);
}

std::optional<std::string> ClueRule::repair(std::string_view ungrammatical) const {
  return replace_first(*compiled_->repair, compiled_->repair_template, ungrammatical);
}

std::vector<ClueRule> parse_rules(std::string_view content,
                                  std::string_view origin) {
  std::vector<ClueRule> rules;
  std::set<std::string> ids;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
      }
      if (!obj.is_object()) throw ValidationError("rule is not a JSON object");
      ClueRuleSpec spec;
      spec.id = required_string(obj, "id");
      const std::string code = required_string(obj, "error_type");
      const auto parsed = parse_error_code(code);
      if (!parsed) throw ValidationError("rule '" + spec.id + "': unknown error type '" + code + "'");
      spec.error_type = *parsed;
      spec.corrupt_pattern = required_string(obj, "corrupt_pattern");
      spec.corrupt_template = required_string(obj, "corrupt_template");
      spec.repair_pattern = required_string(obj, "repair_pattern");
      spec.repair_template = required_string(obj, "repair_template");
      if (!ids.insert(spec.id).second) {
        throw ValidationError("duplicate rule id '" + spec.id + "'");
      }
      rules.push_back(ClueRule::compile(std::move(spec)));
    } catch (const ValidationError& e) {
      throw ParseError(i + 1, e.what(), std::string(origin));
    }
  }
  return rules;
}

std::vector<ClueRule> load_rules(const std::filesystem::path& path) {
  return parse_rules(read_file(path), path.string());
}

std::optional<ParallelPair> apply_rule(const ClueRule& rule,
                                       std::string_view grammatical,
                                       std::string id) {
  auto corrupted = rule.corrupt(grammatical);
  if (!corrupted) return std::nullopt;
  if (*corrupted == grammatical) {
    log::warn("rule '" + rule.id() + "' left the sentence unchanged: " +
              std::string(grammatical));
    return std::nullopt;
  }
  const auto restored = rule.repair(*corrupted);
  if (!restored || *restored != grammatical) {
    log::warn("rule '" + rule.id() + "' failed the repair round trip on: " +
              std::string(grammatical));
    return std::nullopt;
  }
  ParallelPair pair;
  pair.id = std::move(id);
  pair.ungrammatical = std::move(*corrupted);
  pair.grammatical = std::string(grammatical);
  pair.error_type = rule.error_type();
  pair.source = PairSource::RuleSynthesized;
  return pair;
}

std::vector<ParallelPair> synthesize_corpus(std::span<const ClueRule> rules,
                                            std::span<const std::string> sentences,
                                            std::size_t max_per_rule) {
  std::vector<ParallelPair> out;
  std::set<std::string> seen;
  for (const auto& rule : rules) {
    std::size_t kept = 0;
    for (const auto& sentence : sentences) {
      if (kept >= max_per_rule) break;
      if (sentence.empty()) continue;
      auto pair = apply_rule(rule, sentence);
      if (!pair || !seen.insert(pair->ungrammatical).second) continue;
      pair->id = "syn-" + ordinal_id(out.size() + 1);
      out.push_back(std::move(*pair));
      ++kept;
    }
  }
  return out;
}

const ClueRule* find_rule_for_clues(std::span<const ClueRule> rules,
                                    const CluePair& clues) {
  for (const auto& rule : rules) {
    const std::string& pattern = rule.spec().repair_pattern;
    if (pattern.find(clues.first) != std::string::npos &&
        pattern.find(clues.second) != std::string::npos) {
      return &rule;
    }
  }
  return nullptr;
}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  for (std::string_view slot : {"{clue_a}", "{clue_b}", "{n}"}) {
    if (text_.find(slot) == std::string::npos) {
      throw ConfigError("prompt template lacks the " + std::string(slot) +
                        " placeholder");
    }
  }
}

const PromptTemplate& PromptTemplate::standard() {
  static const PromptTemplate instance{std::string(kStandardPrompt)};
  return instance;
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  std::string text = read_file(path);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
    text.pop_back();
  }
  return PromptTemplate(std::move(text));
}

CluePrompt build_prompt(ErrorCode error_type, const CluePair& clues,
                        std::size_t n_samples,
                        const PromptTemplate& prompt_template) {
  if (clue_class(error_type) != ClueClass::WithClues) {
    throw ValidationError("error type " + std::string(to_string(error_type)) +
                          " has no clues; generation covers RC, SC and IC only");
  }
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  if (clues.first.empty() || clues.second.empty()) {
    throw ValidationError("clue strings must be non-empty");
  }
  const std::string type_label = std::string(display_name(error_type)) + "（" +
                                 std::string(to_string(error_type)) + "）";
  const std::string count = std::to_string(n_samples);
  CluePrompt prompt{error_type, clues, n_samples, {}};
  prompt.rendered = substitute_placeholders(prompt_template.text(),
                                            {{"clue_a", clues.first},
                                             {"clue_b", clues.second},
                                             {"error_type", type_label},
                                             {"n", count}});
  return prompt;
}

}  // namespace cgec
