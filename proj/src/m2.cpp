#include "cgec/m2.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/unicode.hpp"

namespace cgec {
namespace {

constexpr std::string_view kNone = "-NONE-";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t sep = line.find("|||", pos);
    if (sep == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, sep - pos));
    pos = sep + 3;
  }
}

long parse_long(std::string_view text) {
  long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::string strip_spaces(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c != ' ') out.push_back(c);
  }
  return out;
}

std::size_t source_length(std::string_view source, GranularityMode mode) {
  if (mode == GranularityMode::Char) return decode_utf8(source).size();
  return segment(source, Granularity::presegmented_words()).size();
}

bool overlaps(const Edit& a, const Edit& b) {
  if (b.start < a.end) return true;
  return a.start == a.end && b.start == b.end && a.start == b.start;
}

struct PendingBlock {
  std::string source;
  std::size_t length = 0;
  std::vector<GoldAnnotation> annotations;

  GoldAnnotation& annotator(int id) {
    for (auto& a : annotations) {
      if (a.annotator_id == id) return a;
    }
    annotations.push_back(GoldAnnotation{{}, id, {}});
    return annotations.back();
  }
};

// Parses "A start end|||type|||correction|||required|||comment|||annotator".
void parse_edit_line(std::string_view line, GranularityMode mode,
                     PendingBlock& block) {
  const auto fields = split_fields(line.substr(2));
  if (fields.size() != 6) {
    throw ValidationError("edit line needs 6 '|||'-separated fields, got " +
                          std::to_string(fields.size()));
  }
  const std::string_view span = trim(fields[0]);
  const std::size_t space = span.find(' ');
  if (space == std::string_view::npos) {
    throw ValidationError("edit span must be 'start end'");
  }
  const long start = parse_long(span.substr(0, space));
  const long end = parse_long(trim(span.substr(space + 1)));
  const long annotator = parse_long(trim(fields[5]));
  if (annotator < 0) throw ValidationError("annotator id must be >= 0");

  GoldAnnotation& annotation = block.annotator(static_cast<int>(annotator));
  if (start == -1 && end == -1) return;  // no-error annotation
  if (start < 0 || end < start) {
    throw ValidationError("invalid edit span " + std::string(span));
  }
  if (static_cast<std::size_t>(end) > block.length) {
    throw ValidationError("edit span " + std::string(span) +
                          " exceeds the sentence length " +
                          std::to_string(block.length));
  }
  const std::string_view correction = fields[2];
  std::string replacement;
  if (correction == kNone) {
    // "-NONE-" deletes a span; on an empty span it marks "no error".
    if (start == end) return;
  } else {
    replacement = mode == GranularityMode::Word ? strip_spaces(correction)
                                                : std::string(correction);
  }
  if (start == end && replacement.empty()) {
    throw ValidationError("empty insertion at " + std::to_string(start));
  }
  annotation.edits.push_back(
      GoldEdit{Edit{static_cast<std::size_t>(start),
                    static_cast<std::size_t>(end), std::move(replacement)},
               std::string(fields[1])});
}

void finish_block(PendingBlock& block, std::vector<M2Sentence>& out,
                  std::size_t line_no, std::string_view origin) {
  M2Sentence sentence;
  sentence.id = sentence_id_for(out.size());
  sentence.source = std::move(block.source);
  if (block.annotations.empty()) {
    block.annotations.push_back(GoldAnnotation{{}, 0, {}});
  }
  for (auto& annotation : block.annotations) {
    annotation.sentence_id = sentence.id;
    auto& edits = annotation.edits;
    std::stable_sort(edits.begin(), edits.end(),
                     [](const GoldEdit& a, const GoldEdit& b) {
                       return std::pair(a.edit.start, a.edit.end) <
                              std::pair(b.edit.start, b.edit.end);
                     });
    for (std::size_t i = 1; i < edits.size(); ++i) {
      if (overlaps(edits[i - 1].edit, edits[i].edit)) {
        throw ParseError(line_no,
                         "overlapping edits for annotator " +
                             std::to_string(annotation.annotator_id),
                         std::string(origin));
      }
    }
  }
  sentence.annotations = std::move(block.annotations);
  out.push_back(std::move(sentence));
  block = PendingBlock{};
}

std::string_view default_type(const Edit& edit) {
  switch (edit.kind()) {
    case EditKind::Insert:
      return "M";
    case EditKind::Delete:
      return "R";
    case EditKind::Substitute:
      return "S";
  }
  return "S";
}

// F0.5 as an exact fraction so that tie-breaking never depends on rounding.
struct FHalf {
  std::size_t num;
  std::size_t den;

  static FHalf of(const Counts& c) {
    if (c.tp == 0) return {(c.fp == 0 && c.fn == 0) ? 1u : 0u, 1};
    // 1.25 tp / (1.25 tp + 0.25 fn + fp), scaled by 4.
    return {5 * c.tp, 5 * c.tp + c.fn + 4 * c.fp};
  }

  friend bool operator<(const FHalf& a, const FHalf& b) {
    return static_cast<unsigned __int128>(a.num) * b.den <
           static_cast<unsigned __int128>(b.num) * a.den;
  }
  friend bool operator==(const FHalf& a, const FHalf& b) {
    return static_cast<unsigned __int128>(a.num) * b.den ==
           static_cast<unsigned __int128>(b.num) * a.den;
  }
};

void fill_ratios(ScoreReport& report) {
  report.precision = precision(report.totals);
  report.recall = recall(report.totals);
  report.f_half = f_beta(report.precision, report.recall, kMaxMatchBeta);
}

std::string fixed2(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

}  // namespace

std::vector<Edit> GoldAnnotation::plain_edits() const {
  std::vector<Edit> out;
  out.reserve(edits.size());
  for (const auto& e : edits) out.push_back(e.edit);
  return out;
}

std::string sentence_id_for(std::size_t index) { return std::to_string(index); }

std::vector<M2Sentence> parse_m2(std::string_view content,
                                 GranularityMode mode,
                                 std::string_view origin) {
  std::vector<M2Sentence> sentences;
  PendingBlock block;
  bool in_block = false;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = lines[i];
    try {
      if (trim(line).empty()) {
        if (in_block) finish_block(block, sentences, line_no, origin);
        in_block = false;
      } else if (line.starts_with("S ")) {
        if (in_block) throw ValidationError("missing blank line before 'S'");
        block.source = std::string(line.substr(2));
        if (block.source.empty()) throw ValidationError("empty source sentence");
        block.length = source_length(block.source, mode);
        in_block = true;
      } else if (line.starts_with("A ")) {
        if (!in_block) throw ValidationError("'A' line outside a sentence block");
        parse_edit_line(line, mode, block);
      } else {
        throw ValidationError("expected a line starting with 'S ' or 'A '");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what(), std::string(origin));
    }
  }
  if (in_block) finish_block(block, sentences, lines.size(), origin);
  return sentences;
}

std::vector<M2Sentence> load_m2(const std::filesystem::path& path,
                                GranularityMode mode) {
  return parse_m2(read_file(path), mode, path.string());
}

std::string write_m2(std::span<const M2Sentence> sentences) {
  std::string out;
  for (const auto& sentence : sentences) {
    out += "S " + sentence.source + "\n";
    for (const auto& annotation : sentence.annotations) {
      const std::string tail =
          "|||REQUIRED|||-NONE-|||" + std::to_string(annotation.annotator_id) + "\n";
      if (annotation.edits.empty()) {
        out += "A -1 -1|||noop|||-NONE-" + tail;
        continue;
      }
      for (const auto& gold : annotation.edits) {
        const Edit& e = gold.edit;
        const std::string_view type =
            gold.type.empty() ? default_type(e) : std::string_view(gold.type);
        out += "A " + std::to_string(e.start) + " " + std::to_string(e.end) +
               "|||" + std::string(type) + "|||" +
               (e.replacement.empty() ? std::string(kNone) : e.replacement) + tail;
      }
    }
    out += "\n";
  }
  return out;
}

std::map<std::string, std::vector<GoldAnnotation>> gold_by_sentence(
    std::span<const M2Sentence> sentences) {
  std::map<std::string, std::vector<GoldAnnotation>> gold;
  for (const auto& s : sentences) gold[s.id] = s.annotations;
  return gold;
}

Counts& Counts::operator+=(const Counts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

double precision(const Counts& c) {
  if (c.tp + c.fp == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double recall(const Counts& c) {
  if (c.tp + c.fn == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double f_beta(double p, double r, double beta) {
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  if (!(p >= 0.0 && p <= 1.0 && r >= 0.0 && r <= 1.0)) {
    throw ValidationError("precision and recall must lie in [0, 1]");
  }
  const double b2 = beta * beta;
  const double denominator = b2 * p + r;
  if (denominator == 0.0) return 0.0;
  return (1.0 + b2) * p * r / denominator;
}

Counts match_edits(std::span<const Edit> system, std::span<const Edit> gold) {
  auto normalized = [](std::span<const Edit> edits) {
    std::vector<Edit> out;
    out.reserve(edits.size());
    for (const auto& e : edits) out.push_back({e.start, e.end, nfc(e.replacement)});
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto sys = normalized(system);
  const auto ref = normalized(gold);
  std::size_t tp = 0;
  auto s = sys.begin();
  auto g = ref.begin();
  while (s != sys.end() && g != ref.end()) {
    if (*s < *g) {
      ++s;
    } else if (*g < *s) {
      ++g;
    } else {
      ++tp;
      ++s;
      ++g;
    }
  }
  return Counts{tp, system.size() - tp, gold.size() - tp};
}

int select_reference(std::span<const AnnotatorCounts> per_annotator,
                     const Counts& cumulative) {
  if (per_annotator.empty()) {
    throw ValidationError("reference selection needs at least one annotator");
  }
  const AnnotatorCounts* best = &per_annotator.front();
  FHalf best_f = FHalf::of(cumulative + best->counts);
  for (const auto& candidate : per_annotator.subspan(1)) {
    const FHalf f = FHalf::of(cumulative + candidate.counts);
    bool better = best_f < f;
    if (f == best_f) {
      if (candidate.counts.tp != best->counts.tp) {
        better = candidate.counts.tp > best->counts.tp;
      } else {
        better = candidate.annotator_id < best->annotator_id;
      }
    }
    if (better) {
      best = &candidate;
      best_f = f;
    }
  }
  return best->annotator_id;
}

ScoreReport score_corpus(
    std::span<const std::string> sources,
    std::span<const std::string> hypotheses,
    const std::map<std::string, std::vector<GoldAnnotation>>& gold,
    const Granularity& granularity, const ScoreOptions& options) {
  if (sources.size() != hypotheses.size()) {
    throw ValidationError("source/hypothesis length mismatch: " +
                          std::to_string(sources.size()) + " vs " +
                          std::to_string(hypotheses.size()));
  }
  const std::size_t n = sources.size();

  std::vector<const std::vector<GoldAnnotation>*> references(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = sentence_id_for(i);
    auto it = gold.find(id);
    if (it == gold.end() || it->second.empty()) {
      throw ValidationError("missing gold annotation for sentence " + id);
    }
    references[i] = &it->second;
  }

  struct Extracted {
    std::vector<Edit> edits;
    std::size_t source_length = 0;
  };
  std::vector<Extracted> extracted(n);
  auto extract_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto tokens = segment(sources[i], granularity);
      const auto hyp = segment(hypotheses[i], granularity);
      std::vector<Edit> edits;
      for (auto& region : merge_alignment(tokens, hyp, align(tokens, hyp))) {
        edits.push_back(std::move(region.edit));
      }
      extracted[i] = {std::move(edits), tokens.size()};
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    extract_range(0, n);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> workers;
      const std::size_t chunk = (n + threads - 1) / threads;
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(n, t * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        workers.emplace_back([&, t, begin, end] {
          try {
            extract_range(begin, end);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  ScoreReport report;
  report.granularity = granularity.mode;
  report.per_sentence.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = sentence_id_for(i);
    std::vector<AnnotatorCounts> candidates;
    for (const auto& annotation : *references[i]) {
      for (const auto& g : annotation.edits) {
        if (g.edit.end > extracted[i].source_length) {
          throw ValidationError("gold edit beyond the end of sentence " + id);
        }
      }
      candidates.push_back({annotation.annotator_id,
                            match_edits(extracted[i].edits, annotation.plain_edits())});
    }
    const int chosen = select_reference(candidates, report.totals);
    const auto it = std::find_if(candidates.begin(), candidates.end(),
                                 [chosen](const AnnotatorCounts& c) {
                                   return c.annotator_id == chosen;
                                 });
    report.totals += it->counts;
    report.per_sentence.push_back({id, chosen, it->counts});
  }
  fill_ratios(report);
  return report;
}

ScoreReport score_m2(std::span<const M2Sentence> gold,
                     std::span<const std::string> hypotheses,
                     const Granularity& granularity,
                     const ScoreOptions& options) {
  std::vector<std::string> sources;
  sources.reserve(gold.size());
  for (const auto& s : gold) sources.push_back(s.source);
  return score_corpus(sources, hypotheses, gold_by_sentence(gold), granularity,
                      options);
}

double as_percent(double ratio) { return std::round(ratio * 10000.0) / 100.0; }

std::string format_report(const ScoreReport& report) {
  std::ostringstream out;
  out << "MaxMatch (M2) evaluation, " << to_string(report.granularity)
      << " level, F" << kMaxMatchBeta << "\n";
  out << "# precision = 1 when TP+FP = 0; recall = 1 when TP+FN = 0\n";
  out << "Sentences : " << report.per_sentence.size() << "\n";
  out << "TP FP FN  : " << report.totals.tp << ' ' << report.totals.fp << ' '
      << report.totals.fn << "\n";
  out << "Precision : " << fixed2(as_percent(report.precision)) << "\n";
  out << "Recall    : " << fixed2(as_percent(report.recall)) << "\n";
  out << "F0.5      : " << fixed2(as_percent(report.f_half)) << "\n";
  out << "P/R/F0.5  : " << fixed2(as_percent(report.precision)) << '/'
      << fixed2(as_percent(report.recall)) << '/'
      << fixed2(as_percent(report.f_half)) << "\n";
  return out.str();
}

nlohmann::ordered_json report_to_json(const ScoreReport& report) {
  nlohmann::ordered_json obj;
  obj["granularity"] = std::string(to_string(report.granularity));
  obj["beta"] = kMaxMatchBeta;
  obj["conventions"] =
      "precision = 1 when tp+fp = 0; recall = 1 when tp+fn = 0";
  obj["sentences"] = report.per_sentence.size();
  obj["tp"] = report.totals.tp;
  obj["fp"] = report.totals.fp;
  obj["fn"] = report.totals.fn;
  obj["precision"] = as_percent(report.precision);
  obj["recall"] = as_percent(report.recall);
  obj["f0.5"] = as_percent(report.f_half);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : report.per_sentence) {
    nlohmann::ordered_json row;
    row["id"] = s.sentence_id;
    row["annotator"] = s.annotator_id;
    row["tp"] = s.counts.tp;
    row["fp"] = s.counts.fp;
    row["fn"] = s.counts.fn;
    rows.push_back(std::move(row));
  }
  obj["per_sentence"] = std::move(rows);
  return obj;
}

}  // namespace cgec
