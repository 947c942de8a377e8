#ifndef CGEC_CORPUS_HPP_
#define CGEC_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cgec {

// The six native-speaker error categories. The first three are betrayed by
// a surface clue (a co-occurring word pair); the last three are not.
enum class ErrorCode { RC, SC, IC, IWO, IL, MC };

enum class ClueClass { WithClues, WithoutClues };

inline constexpr std::array<ErrorCode, 6> kAllErrorCodes = {
    ErrorCode::RC, ErrorCode::SC, ErrorCode::IC,
    ErrorCode::IWO, ErrorCode::IL, ErrorCode::MC};

constexpr ClueClass clue_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::RC:
    case ErrorCode::SC:
    case ErrorCode::IC:
      return ClueClass::WithClues;
    default:
      return ClueClass::WithoutClues;
  }
}

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view text);

// Chinese category name, e.g. "成分赘余" for RC.
std::string_view display_name(ErrorCode code);

enum class PairSource { RuleSynthesized, LlmGenerated, HumanAnnotated, Augmented };

std::string_view to_string(PairSource source);
std::optional<PairSource> parse_pair_source(std::string_view text);

struct ParallelPair {
  std::string id;
  std::string ungrammatical;
  std::string grammatical;
  std::optional<ErrorCode> error_type;
  PairSource source = PairSource::HumanAnnotated;
  // Set iff source == Augmented.
  std::optional<std::string> parent_id;

  bool operator==(const ParallelPair&) const = default;
};

// Checks the single-pair invariants; throws ValidationError.
void validate_pair(const ParallelPair& pair);

// Checks id uniqueness and that every Augmented pair's parent is present.
void validate_dataset(std::span<const ParallelPair> pairs);

enum class PairFormat { Jsonl, Tsv };

std::optional<PairFormat> parse_pair_format(std::string_view name);
// ".tsv" -> Tsv, everything else -> Jsonl.
PairFormat pair_format_for(const std::filesystem::path& path);

// Zero-padded ordinal used for auto-assigned ids ("000001").
std::string ordinal_id(std::size_t ordinal);

// JSONL: {id, ungrammatical, grammatical, error_type, source, parent_id}.
// TSV: ungrammatical, grammatical, error type, then optional id, source and
// parent id columns. Missing ids get the 1-based record ordinal. Blank lines
// are skipped.
std::vector<ParallelPair> parse_pairs(std::string_view content,
                                      PairFormat format,
                                      std::string_view origin = {});
std::vector<ParallelPair> load_pairs(const std::filesystem::path& path,
                                     PairFormat format);

std::string serialize_pairs(std::span<const ParallelPair> pairs,
                            PairFormat format);
void save_pairs(std::span<const ParallelPair> pairs,
                const std::filesystem::path& path, PairFormat format);

nlohmann::ordered_json pair_to_json(const ParallelPair& pair);

struct TypeShare {
  std::size_t count = 0;
  // Percentage of the total in hundredths of a percent, rounded half-up.
  std::int64_t hundredths = 0;

  // "23.54"
  std::string percent() const;
  bool operator==(const TypeShare&) const = default;
};

struct DatasetStats {
  std::size_t total = 0;
  std::map<ErrorCode, TypeShare> per_type;
  TypeShare unlabeled;
};

DatasetStats compute_stats(std::span<const ParallelPair> pairs);

std::string format_stats_table(const DatasetStats& stats);
nlohmann::ordered_json stats_to_json(const DatasetStats& stats);

}  // namespace cgec

#endif  // CGEC_CORPUS_HPP_
