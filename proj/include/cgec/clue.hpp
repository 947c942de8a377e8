#ifndef CGEC_CLUE_HPP_
#define CGEC_CLUE_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/corpus.hpp"

namespace cgec {

// Plain description of a clue rule as stored in the rule file.
//
// Patterns use a portable regex subset: literals, character classes,
// bounded repetition, lazy quantifiers and numbered groups. Templates
// reference groups as $1..$9. Matching is over code points.
struct ClueRuleSpec {
  std::string id;
  ErrorCode error_type = ErrorCode::RC;
  std::string corrupt_pattern;
  std::string corrupt_template;
  std::string repair_pattern;
  std::string repair_template;

  bool operator==(const ClueRuleSpec&) const = default;
};

// A validated rule with compiled patterns. Cheap to copy and safe to share
// across threads.
class ClueRule {
 public:
  // Throws ValidationError naming the rule when a pattern does not compile,
  // leaves the supported subset, references a missing group, or the error
  // type has no clues.
  static ClueRule compile(ClueRuleSpec spec);

  const ClueRuleSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return spec_.id; }
  ErrorCode error_type() const noexcept { return spec_.error_type; }

  // Rewrites the first match; nullopt when the pattern does not match.
  std::optional<std::string> corrupt(std::string_view grammatical) const;
  std::optional<std::string> repair(std::string_view ungrammatical) const;

 private:
  struct Compiled;

  ClueRule(ClueRuleSpec spec, std::shared_ptr<const Compiled> compiled)
      : spec_(std::move(spec)), compiled_(std::move(compiled)) {}

  ClueRuleSpec spec_;
  std::shared_ptr<const Compiled> compiled_;
};

// JSONL, one rule object per line with the six ClueRuleSpec fields.
std::vector<ClueRule> parse_rules(std::string_view content,
                                  std::string_view origin = {});
std::vector<ClueRule> load_rules(const std::filesystem::path& path);

// Corrupts `grammatical` with the first match of the rule. Returns nullopt
// when the rule does not apply, and also (with a warning) when the repair
// side does not restore the original text exactly.
std::optional<ParallelPair> apply_rule(const ClueRule& rule,
                                       std::string_view grammatical,
                                       std::string id = {});

// Applies rules in order to sentences in order. Keeps at most
// `max_per_rule` pairs per rule and drops pairs whose ungrammatical side was
// already produced. Ids are "syn-000001", ... in output order.
std::vector<ParallelPair> synthesize_corpus(std::span<const ClueRule> rules,
                                            std::span<const std::string> sentences,
                                            std::size_t max_per_rule);

struct CluePair {
  std::string first;
  std::string second;

  bool operator==(const CluePair&) const = default;
};

// First rule whose repair pattern contains both clue strings literally.
const ClueRule* find_rule_for_clues(std::span<const ClueRule> rules,
                                    const CluePair& clues);

// Prompt text with {clue_a}, {clue_b}, {error_type} and {n} placeholders.
class PromptTemplate {
 public:
  // Throws ConfigError when {clue_a}, {clue_b} or {n} is missing.
  explicit PromptTemplate(std::string text);

  static const PromptTemplate& standard();
  static PromptTemplate from_file(const std::filesystem::path& path);

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

struct CluePrompt {
  ErrorCode error_type = ErrorCode::RC;
  CluePair clues;
  std::size_t n_samples = 1;
  std::string rendered;

  bool operator==(const CluePrompt&) const = default;
};

CluePrompt build_prompt(ErrorCode error_type, const CluePair& clues,
                        std::size_t n_samples,
                        const PromptTemplate& prompt_template =
                            PromptTemplate::standard());

}  // namespace cgec

#endif  // CGEC_CLUE_HPP_
