#ifndef CGEC_EDIT_HPP_
#define CGEC_EDIT_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cgec {

// A token of a sentence. Offsets are code-point indices into the sentence
// (into the separator-free text when the input was pre-segmented).
struct Token {
  std::string surface;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const Token&) const = default;
};

enum class EditKind { Insert, Delete, Substitute };

std::string_view to_string(EditKind kind);

// Replace source tokens [start, end) with `replacement`. The replacement is
// the surface text to splice in, without token separators.
struct Edit {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string replacement;

  EditKind kind() const;
  bool operator==(const Edit&) const = default;
  auto operator<=>(const Edit&) const = default;
};

// Builds an edit, rejecting the empty no-op (start == end, no replacement).
Edit make_edit(std::size_t start, std::size_t end, std::string replacement);

// Word list for forward maximum matching.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::span<const std::string> words);

  // One word per line, UTF-8. Blank lines are ignored.
  static Lexicon from_file(const std::filesystem::path& path);

  bool contains(std::u32string_view word) const;
  std::size_t max_word_length() const noexcept { return max_length_; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::u32string> words_;
  std::size_t max_length_ = 0;
};

enum class GranularityMode { Char, Word };

struct Granularity {
  GranularityMode mode = GranularityMode::Char;
  std::shared_ptr<const Lexicon> lexicon;
  // Word mode only: input is already segmented with ASCII spaces.
  bool presegmented = false;

  static Granularity chars();
  static Granularity words(std::shared_ptr<const Lexicon> lexicon);
  static Granularity presegmented_words();
};

std::string_view to_string(GranularityMode mode);

// Char mode: one token per code point. Word mode: greedy forward maximum
// match against the lexicon, falling back to single characters; or a split
// on ASCII spaces for pre-segmented input. Throws ValidationError on an
// empty sentence and ConfigError for word mode without a lexicon or
// pre-segmented input.
std::vector<Token> segment(std::string_view sentence,
                           const Granularity& granularity);

enum class AlignOp { Match, Substitute, Delete, Insert };

struct AlignStep {
  AlignOp op;
  // Index of the consumed source / target token. For Insert, `source` is
  // the position before which the token is inserted; for Delete, `target`
  // is the target position at which the deletion happens.
  std::size_t source;
  std::size_t target;

  bool operator==(const AlignStep&) const = default;
};

struct Alignment {
  std::vector<AlignStep> steps;
  std::size_t cost = 0;
};

// Unit-cost Levenshtein alignment. Traceback runs from the end of both
// sequences and prefers match > substitute > delete > insert on ties.
Alignment align(std::span<const Token> source, std::span<const Token> target);
Alignment align(std::span<const std::string> source,
                std::span<const std::string> target);

// An edit together with the target tokens it produces.
struct EditRegion {
  Edit edit;
  std::size_t target_start = 0;
  std::size_t target_end = 0;
};

// Merges maximal runs of non-match steps into edits.
std::vector<EditRegion> merge_alignment(std::span<const Token> source,
                                        std::span<const Token> target,
                                        const Alignment& alignment);

std::vector<EditRegion> extract_edit_regions(std::string_view source,
                                             std::string_view target,
                                             const Granularity& granularity);

// Segment, align, merge. Edits are sorted by start and non-overlapping.
std::vector<Edit> extract_edits(std::string_view source,
                                std::string_view target,
                                const Granularity& granularity);

// Applies sorted, non-overlapping edits to the source tokens and returns the
// concatenated surface text.
std::string apply_edits(std::span<const Token> source,
                        std::span<const Edit> edits);

// Concatenated surfaces.
std::string join_surfaces(std::span<const Token> tokens);

}  // namespace cgec

#endif  // CGEC_EDIT_HPP_
