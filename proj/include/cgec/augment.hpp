#ifndef CGEC_AUGMENT_HPP_
#define CGEC_AUGMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/corpus.hpp"
#include "cgec/edit.hpp"

namespace cgec {

// Entity surface -> ordered list of similar entities of the same class.
class EntityLexicon {
 public:
  // Throws ValidationError on empty surfaces, a substitute equal to its key,
  // a key without substitutes, or a repeated key.
  void add(std::string entity, std::vector<std::string> substitutes);

  // TSV: "entity \t substitute1 \t substitute2 ...". Blank lines skipped.
  static EntityLexicon parse(std::string_view content, std::string_view origin = {});
  static EntityLexicon from_file(const std::filesystem::path& path);

  const std::map<std::string, std::vector<std::string>>& entries() const noexcept {
    return entries_;
  }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<std::string>& substitutes(const std::string& entity) const;

  // Longest key starting at `pos`, or nullptr.
  const std::string* longest_key_at(std::u32string_view text, std::size_t pos) const;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
  std::map<std::u32string, std::string> keys_;
  std::size_t max_key_length_ = 0;
};

// Half-open code-point range.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

// One entity occurrence, located on both sides of a pair.
struct EntityOccurrence {
  CharSpan ungrammatical;
  CharSpan grammatical;

  bool operator==(const EntityOccurrence&) const = default;
};

struct SubstitutableEntity {
  std::string entity;
  std::vector<EntityOccurrence> occurrences;

  bool operator==(const SubstitutableEntity&) const = default;
};

// Lexicon keys found (longest first, left to right) the same number of times
// on both sides, with every occurrence outside the pair's char-level edit
// regions and aligned to its counterpart on the other side. Ordered by first
// occurrence in the ungrammatical sentence.
std::vector<SubstitutableEntity> find_substitutable_spans(
    const ParallelPair& pair, const EntityLexicon& lexicon);

struct Substitution {
  std::string entity;
  std::string replacement;
  // Index into the entity's occurrence list.
  std::size_t occurrence_index = 0;

  bool operator==(const Substitution&) const = default;
};

struct AugmentationPlan {
  std::string pair_id;
  std::vector<Substitution> substitutions;
  std::uint64_t seed = 0;

  bool operator==(const AugmentationPlan&) const = default;
};

// Picks one substitute per substitutable entity with a seeded generator and
// applies it at every occurrence. nullopt when nothing is substitutable.
std::optional<AugmentationPlan> plan_augmentation(const ParallelPair& pair,
                                                  const EntityLexicon& lexicon,
                                                  std::uint64_t seed);

// Applies the plan to both sides. Returns nullopt (with a warning) when the
// re-extracted edits of the result differ from the parent's shifted edits.
std::optional<ParallelPair> apply_plan(const ParallelPair& pair,
                                       const EntityLexicon& lexicon,
                                       const AugmentationPlan& plan,
                                       std::string id);

// Parent char-level edits moved past the length changes of substitutions
// that precede them on the ungrammatical side.
std::vector<Edit> shift_edits(std::span<const Edit> parent_edits,
                              const ParallelPair& parent,
                              const EntityLexicon& lexicon,
                              const AugmentationPlan& plan);

// Augmented pair "<parent id>-aug" or nullopt.
std::optional<ParallelPair> augment_pair(const ParallelPair& pair,
                                         const EntityLexicon& lexicon,
                                         std::uint64_t seed);

// Up to `factor` variants per pair with distinct plans, ids
// "<parent id>-aug1", "-aug2", ... Originals are not included.
std::vector<ParallelPair> augment_corpus(std::span<const ParallelPair> pairs,
                                         const EntityLexicon& lexicon,
                                         std::size_t factor, std::uint64_t seed);

}  // namespace cgec

#endif  // CGEC_AUGMENT_HPP_
