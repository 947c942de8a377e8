#ifndef CGEC_M2_HPP_
#define CGEC_M2_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/edit.hpp"
#include "json.hpp"

namespace cgec {

// MaxMatch evaluation weights precision twice as much as recall.
inline constexpr double kMaxMatchBeta = 0.5;

struct GoldEdit {
  Edit edit;
  // Error-type column of the M2 line. Preserved, never used for matching.
  std::string type;

  bool operator==(const GoldEdit&) const = default;
};

// One annotator's edit set for one sentence. An empty edit list is the
// "no error" annotation.
struct GoldAnnotation {
  std::string sentence_id;
  int annotator_id = 0;
  std::vector<GoldEdit> edits;

  std::vector<Edit> plain_edits() const;
  bool operator==(const GoldAnnotation&) const = default;
};

struct M2Sentence {
  std::string id;
  // Raw text for char level; space-separated tokens for word level.
  std::string source;
  std::vector<GoldAnnotation> annotations;

  bool operator==(const M2Sentence&) const = default;
};

// Sentence ids are zero-based block ordinals ("0", "1", ...), matching the
// indices score_corpus assigns to its inputs.
std::string sentence_id_for(std::size_t index);

std::vector<M2Sentence> parse_m2(std::string_view content,
                                 GranularityMode mode,
                                 std::string_view origin = {});
std::vector<M2Sentence> load_m2(const std::filesystem::path& path,
                                GranularityMode mode);

std::string write_m2(std::span<const M2Sentence> sentences);

std::map<std::string, std::vector<GoldAnnotation>> gold_by_sentence(
    std::span<const M2Sentence> sentences);

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& other);
  friend Counts operator+(Counts a, const Counts& b) { return a += b; }
  bool operator==(const Counts&) const = default;
};

// Conventions: precision is 1 when tp + fp == 0, recall is 1 when
// tp + fn == 0.
double precision(const Counts& counts);
double recall(const Counts& counts);

// (1 + b^2) P R / (b^2 P + R), 0 when the denominator is 0. Throws
// ValidationError for beta <= 0 or ratios outside [0, 1].
double f_beta(double precision, double recall, double beta);

// Exact-span, NFC-normalized replacement matching.
Counts match_edits(std::span<const Edit> system, std::span<const Edit> gold);

struct AnnotatorCounts {
  int annotator_id = 0;
  Counts counts;
};

// Annotator maximizing F0.5 of (cumulative + sentence counts); ties go to
// the larger sentence tp, then the smaller annotator id.
int select_reference(std::span<const AnnotatorCounts> per_annotator,
                     const Counts& cumulative);

struct SentenceScore {
  std::string sentence_id;
  int annotator_id = 0;
  Counts counts;

  bool operator==(const SentenceScore&) const = default;
};

struct ScoreReport {
  Counts totals;
  double precision = 1.0;
  double recall = 1.0;
  double f_half = 1.0;
  GranularityMode granularity = GranularityMode::Char;
  std::vector<SentenceScore> per_sentence;
};

struct ScoreOptions {
  // Worker threads for per-sentence edit extraction. Selection and
  // accumulation stay sequential in file order.
  unsigned threads = 1;
};

// Sentence i has id sentence_id_for(i).
ScoreReport score_corpus(
    std::span<const std::string> sources,
    std::span<const std::string> hypotheses,
    const std::map<std::string, std::vector<GoldAnnotation>>& gold,
    const Granularity& granularity, const ScoreOptions& options = {});

// Scores against an M2 file, taking sources from its S lines.
ScoreReport score_m2(std::span<const M2Sentence> gold,
                     std::span<const std::string> hypotheses,
                     const Granularity& granularity,
                     const ScoreOptions& options = {});

// Ratio in [0, 1] to a percentage rounded to two decimals.
double as_percent(double ratio);

std::string format_report(const ScoreReport& report);
nlohmann::ordered_json report_to_json(const ScoreReport& report);

}  // namespace cgec

#endif  // CGEC_M2_HPP_
