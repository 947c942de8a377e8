#include "cgec/corpus.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/unicode.hpp"

namespace cgec {
namespace {

constexpr std::array<std::string_view, 6> kCodeNames = {"RC",  "SC", "IC",
                                                        "IWO", "IL", "MC"};
constexpr std::array<std::string_view, 6> kDisplayNames = {
    "成分赘余", "结构混乱", "搭配不当", "语序不当", "不合逻辑", "成分残缺"};
constexpr std::array<std::string_view, 4> kSourceNames = {
    "RuleSynthesized", "LlmGenerated", "HumanAnnotated", "Augmented"};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

std::optional<std::string> optional_string(const nlohmann::json& obj,
                                           const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

ParallelPair pair_from_json(std::string_view text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ValidationError("record is not a JSON object");

  ParallelPair pair;
  auto ungrammatical = optional_string(obj, "ungrammatical");
  auto grammatical = optional_string(obj, "grammatical");
  if (!ungrammatical || !grammatical) {
    throw ValidationError("record needs 'ungrammatical' and 'grammatical'");
  }
  pair.ungrammatical = std::move(*ungrammatical);
  pair.grammatical = std::move(*grammatical);
  pair.id = optional_string(obj, "id").value_or("");
  if (auto code = optional_string(obj, "error_type")) {
    pair.error_type = parse_error_code(*code);
    if (!pair.error_type) {
      throw ValidationError("unknown error type '" + *code + "'");
    }
  }
  if (auto source = optional_string(obj, "source")) {
    auto parsed = parse_pair_source(*source);
    if (!parsed) throw ValidationError("unknown source '" + *source + "'");
    pair.source = *parsed;
  }
  pair.parent_id = optional_string(obj, "parent_id");
  return pair;
}

ParallelPair pair_from_tsv(std::string_view text) {
  const auto fields = split_tabs(text);
  if (fields.size() < 2 || fields.size() > 6) {
    throw ValidationError("expected 2 to 6 tab-separated columns, got " +
                               std::to_string(fields.size()));
  }
  ParallelPair pair;
  pair.ungrammatical = std::string(fields[0]);
  pair.grammatical = std::string(fields[1]);
  if (fields.size() > 2 && !trim(fields[2]).empty()) {
    pair.error_type = parse_error_code(trim(fields[2]));
    if (!pair.error_type) {
      throw ValidationError("unknown error type '" + std::string(fields[2]) +
                            "'");
    }
  }
  if (fields.size() > 3) pair.id = std::string(fields[3]);
  if (fields.size() > 4 && !fields[4].empty()) {
    auto parsed = parse_pair_source(fields[4]);
    if (!parsed) {
      throw ValidationError("unknown source '" + std::string(fields[4]) + "'");
    }
    pair.source = *parsed;
  }
  if (fields.size() > 5 && !fields[5].empty()) {
    pair.parent_id = std::string(fields[5]);
  }
  return pair;
}

void require_tsv_safe(const ParallelPair& pair, std::string_view value) {
  if (value.find_first_of("\t\r\n") != std::string_view::npos) {
    throw ValidationError("pair '" + pair.id +
                          "' contains a tab or line break and cannot be "
                          "written as TSV; use the jsonl format");
  }
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  return kCodeNames[static_cast<std::size_t>(code)];
}

std::optional<ErrorCode> parse_error_code(std::string_view text) {
  for (std::size_t i = 0; i < kCodeNames.size(); ++i) {
    if (kCodeNames[i] == text) return static_cast<ErrorCode>(i);
  }
  return std::nullopt;
}

std::string_view display_name(ErrorCode code) {
  return kDisplayNames[static_cast<std::size_t>(code)];
}

std::string_view to_string(PairSource source) {
  return kSourceNames[static_cast<std::size_t>(source)];
}

std::optional<PairSource> parse_pair_source(std::string_view text) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
    if (kSourceNames[i] == text) return static_cast<PairSource>(i);
  }
  return std::nullopt;
}

void validate_pair(const ParallelPair& pair) {
  const std::string label = pair.id.empty() ? "pair" : "pair '" + pair.id + "'";
  if (pair.ungrammatical.empty() || pair.grammatical.empty()) {
    throw ValidationError(label + ": both sentences must be non-empty");
  }
  if (pair.ungrammatical == pair.grammatical) {
    throw ValidationError(label + ": ungrammatical and grammatical sides are identical");
  }
  decode_utf8(pair.ungrammatical);
  decode_utf8(pair.grammatical);
  const bool augmented = pair.source == PairSource::Augmented;
  if (augmented != pair.parent_id.has_value()) {
    throw ValidationError(label + ": parent_id must be set exactly when source is Augmented");
  }
  if (pair.parent_id && pair.parent_id->empty()) {
    throw ValidationError(label + ": empty parent_id");
  }
}

void validate_dataset(std::span<const ParallelPair> pairs) {
  std::set<std::string_view> ids;
  for (const auto& pair : pairs) {
    validate_pair(pair);
    if (!ids.insert(pair.id).second) {
      throw ValidationError("duplicate id '" + pair.id + "'");
    }
  }
  for (const auto& pair : pairs) {
    if (pair.parent_id && !ids.contains(*pair.parent_id)) {
      throw ValidationError("pair '" + pair.id + "' references missing parent '" +
                            *pair.parent_id + "'");
    }
  }
}

std::optional<PairFormat> parse_pair_format(std::string_view name) {
  if (name == "jsonl") return PairFormat::Jsonl;
  if (name == "tsv") return PairFormat::Tsv;
  return std::nullopt;
}

PairFormat pair_format_for(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? PairFormat::Tsv : PairFormat::Jsonl;
}

std::string ordinal_id(std::size_t ordinal) {
  std::ostringstream out;
  out << std::setw(6) << std::setfill('0') << ordinal;
  return out.str();
}

std::vector<ParallelPair> parse_pairs(std::string_view content,
                                      PairFormat format,
                                      std::string_view origin) {
  std::vector<ParallelPair> pairs;
  std::set<std::string> ids;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    ParallelPair pair;
    try {
      pair = format == PairFormat::Jsonl ? pair_from_json(lines[i])
                                         : pair_from_tsv(lines[i]);
      if (pair.id.empty()) pair.id = ordinal_id(pairs.size() + 1);
      validate_pair(pair);
      if (!ids.insert(pair.id).second) {
        throw ValidationError("duplicate id '" + pair.id + "'");
      }
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what(), std::string(origin));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<ParallelPair> load_pairs(const std::filesystem::path& path,
                                     PairFormat format) {
  return parse_pairs(read_file(path), format, path.string());
}

nlohmann::ordered_json pair_to_json(const ParallelPair& pair) {
  nlohmann::ordered_json obj;
  obj["id"] = pair.id;
  obj["ungrammatical"] = pair.ungrammatical;
  obj["grammatical"] = pair.grammatical;
  obj["error_type"] = pair.error_type
                          ? nlohmann::ordered_json(std::string(to_string(*pair.error_type)))
                          : nlohmann::ordered_json(nullptr);
  obj["source"] = std::string(to_string(pair.source));
  obj["parent_id"] = pair.parent_id ? nlohmann::ordered_json(*pair.parent_id)
                                    : nlohmann::ordered_json(nullptr);
  return obj;
}

std::string serialize_pairs(std::span<const ParallelPair> pairs,
                            PairFormat format) {
  std::string out;
  for (const auto& pair : pairs) {
    validate_pair(pair);
    if (format == PairFormat::Jsonl) {
      out += pair_to_json(pair).dump();
    } else {
      require_tsv_safe(pair, pair.ungrammatical);
      require_tsv_safe(pair, pair.grammatical);
      require_tsv_safe(pair, pair.id);
      if (pair.parent_id) require_tsv_safe(pair, *pair.parent_id);
      out += pair.ungrammatical;
      out += '\t';
      out += pair.grammatical;
      out += '\t';
      if (pair.error_type) out += to_string(*pair.error_type);
      out += '\t';
      out += pair.id;
      out += '\t';
      out += to_string(pair.source);
      out += '\t';
      if (pair.parent_id) out += *pair.parent_id;
    }
    out += '\n';
  }
  return out;
}

void save_pairs(std::span<const ParallelPair> pairs,
                const std::filesystem::path& path, PairFormat format) {
  write_file_atomic(path, serialize_pairs(pairs, format));
}

std::string TypeShare::percent() const {
  std::ostringstream out;
  out << hundredths / 100 << '.' << std::setw(2) << std::setfill('0')
      << hundredths % 100;
  return out.str();
}

DatasetStats compute_stats(std::span<const ParallelPair> pairs) {
  DatasetStats stats;
  stats.total = pairs.size();
  for (ErrorCode code : kAllErrorCodes) stats.per_type[code] = {};
  for (const auto& pair : pairs) {
    if (pair.error_type) {
      ++stats.per_type[*pair.error_type].count;
    } else {
      ++stats.unlabeled.count;
    }
  }
  // round(count * 100 / total, 2) half-up, in exact integer arithmetic.
  auto share = [total = static_cast<std::int64_t>(stats.total)](TypeShare& s) {
    if (total == 0) {
      s.hundredths = 0;
      return;
    }
    const auto count = static_cast<std::int64_t>(s.count);
    s.hundredths = (count * 20000 + total) / (2 * total);
  };
  for (auto& [code, s] : stats.per_type) share(s);
  share(stats.unlabeled);
  return stats;
}

std::string format_stats_table(const DatasetStats& stats) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "type" << std::right << std::setw(8)
      << "count" << std::setw(10) << "percent" << '\n';
  auto row = [&out](std::string_view name, const TypeShare& s) {
    out << std::left << std::setw(10) << name << std::right << std::setw(8)
        << s.count << std::setw(10) << s.percent() << '\n';
  };
  for (const auto& [code, s] : stats.per_type) row(to_string(code), s);
  row("unlabeled", stats.unlabeled);
  out << std::left << std::setw(10) << "total" << std::right << std::setw(8)
      << stats.total << '\n';
  return out.str();
}

nlohmann::ordered_json stats_to_json(const DatasetStats& stats) {
  nlohmann::ordered_json obj;
  obj["total"] = stats.total;
  auto share_json = [](const TypeShare& s) {
    nlohmann::ordered_json j;
    j["count"] = s.count;
    j["percentage"] = static_cast<double>(s.hundredths) / 100.0;
    return j;
  };
  nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
  for (const auto& [code, s] : stats.per_type) {
    per_type[std::string(to_string(code))] = share_json(s);
  }
  obj["per_type"] = std::move(per_type);
  obj["unlabeled"] = share_json(stats.unlabeled);
  return obj;
}

}  // namespace cgec
