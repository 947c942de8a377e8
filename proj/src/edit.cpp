#include "cgec/edit.hpp"

#include <algorithm>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/unicode.hpp"

namespace cgec {
namespace {

template <typename Seq, typename Eq>
Alignment align_impl(const Seq& source, const Seq& target, Eq equal) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  const std::size_t width = m + 1;
  std::vector<std::size_t> cost((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return cost[i * width + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag =
          at(i - 1, j - 1) + (equal(source[i - 1], target[j - 1]) ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  Alignment alignment;
  alignment.cost = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0) {
      const bool same = equal(source[i - 1], target[j - 1]);
      if (same && here == at(i - 1, j - 1)) {
        alignment.steps.push_back({AlignOp::Match, i - 1, j - 1});
        --i;
        --j;
        continue;
      }
      if (!same && here == at(i - 1, j - 1) + 1) {
        alignment.steps.push_back({AlignOp::Substitute, i - 1, j - 1});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && here == at(i - 1, j) + 1) {
      alignment.steps.push_back({AlignOp::Delete, i - 1, j});
      --i;
      continue;
    }
    alignment.steps.push_back({AlignOp::Insert, i, j - 1});
    --j;
  }
  std::reverse(alignment.steps.begin(), alignment.steps.end());
  return alignment;
}

std::vector<Token> char_tokens(std::u32string_view text) {
  std::vector<Token> tokens;
  tokens.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    tokens.push_back({encode_utf8(text[i]), i, i + 1});
  }
  return tokens;
}

std::vector<Token> max_match_tokens(std::u32string_view text,
                                    const Lexicon& lexicon) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 1;
    const std::size_t longest =
        std::min(lexicon.max_word_length(), text.size() - pos);
    for (std::size_t k = longest; k >= 2; --k) {
      if (lexicon.contains(text.substr(pos, k))) {
        len = k;
        break;
      }
    }
    tokens.push_back({encode_utf8(text.substr(pos, len)), pos, pos + len});
    pos += len;
  }
  return tokens;
}

std::vector<Token> presegmented_tokens(std::string_view sentence) {
  std::vector<Token> tokens;
  std::size_t offset = 0;
  std::size_t pos = 0;
  while (pos < sentence.size()) {
    if (sentence[pos] == ' ') {
      ++pos;
      continue;
    }
    std::size_t end = sentence.find(' ', pos);
    if (end == std::string_view::npos) end = sentence.size();
    std::string_view word = sentence.substr(pos, end - pos);
    const std::size_t len = decode_utf8(word).size();
    tokens.push_back({std::string(word), offset, offset + len});
    offset += len;
    pos = end;
  }
  return tokens;
}

}  // namespace

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::Insert:
      return "Insert";
    case EditKind::Delete:
      return "Delete";
    case EditKind::Substitute:
      return "Substitute";
  }
  return "?";
}

EditKind Edit::kind() const {
  if (start == end) return EditKind::Insert;
  return replacement.empty() ? EditKind::Delete : EditKind::Substitute;
}

Edit make_edit(std::size_t start, std::size_t end, std::string replacement) {
  if (start > end) {
    throw ValidationError("edit span [" + std::to_string(start) + "," +
                          std::to_string(end) + ") is reversed");
  }
  if (start == end && replacement.empty()) {
    throw ValidationError("empty insertion at " + std::to_string(start));
  }
  return Edit{start, end, std::move(replacement)};
}

Lexicon::Lexicon(std::span<const std::string> words) {
  for (const auto& word : words) {
    std::u32string decoded = decode_utf8(trim(word));
    if (decoded.empty()) continue;
    max_length_ = std::max(max_length_, decoded.size());
    words_.insert(std::move(decoded));
  }
}

Lexicon Lexicon::from_file(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  return Lexicon(lines);
}

bool Lexicon::contains(std::u32string_view word) const {
  return words_.contains(std::u32string(word));
}

Granularity Granularity::chars() { return Granularity{}; }

Granularity Granularity::words(std::shared_ptr<const Lexicon> lexicon) {
  Granularity g;
  g.mode = GranularityMode::Word;
  g.lexicon = std::move(lexicon);
  return g;
}

Granularity Granularity::presegmented_words() {
  Granularity g;
  g.mode = GranularityMode::Word;
  g.presegmented = true;
  return g;
}

std::string_view to_string(GranularityMode mode) {
  return mode == GranularityMode::Char ? "char" : "word";
}

std::vector<Token> segment(std::string_view sentence,
                           const Granularity& granularity) {
  if (sentence.empty()) throw ValidationError("cannot segment an empty sentence");
  if (granularity.mode == GranularityMode::Char) {
    return char_tokens(decode_utf8(sentence));
  }
  if (granularity.presegmented) {
    auto tokens = presegmented_tokens(sentence);
    if (tokens.empty()) {
      throw ValidationError("pre-segmented sentence has no tokens");
    }
    return tokens;
  }
  if (!granularity.lexicon) {
    throw ConfigError(
        "word granularity needs a lexicon or pre-segmented input");
  }
  return max_match_tokens(decode_utf8(sentence), *granularity.lexicon);
}

Alignment align(std::span<const Token> source, std::span<const Token> target) {
  return align_impl(source, target, [](const Token& a, const Token& b) {
    return a.surface == b.surface;
  });
}

Alignment align(std::span<const std::string> source,
                std::span<const std::string> target) {
  return align_impl(source, target, std::equal_to<>{});
}

std::vector<EditRegion> merge_alignment(std::span<const Token> source,
                                        std::span<const Token> target,
                                        const Alignment& alignment) {
  std::vector<EditRegion> regions;
  std::size_t src = 0;
  std::size_t tgt = 0;
  const auto& steps = alignment.steps;
  std::size_t k = 0;
  while (k < steps.size()) {
    if (steps[k].op == AlignOp::Match) {
      ++src;
      ++tgt;
      ++k;
      continue;
    }
    const std::size_t src_start = src;
    const std::size_t tgt_start = tgt;
    for (; k < steps.size() && steps[k].op != AlignOp::Match; ++k) {
      if (steps[k].op != AlignOp::Insert) ++src;
      if (steps[k].op != AlignOp::Delete) ++tgt;
    }
    std::string replacement =
        join_surfaces(target.subspan(tgt_start, tgt - tgt_start));
    // Word tokens can differ only in segmentation; such runs change nothing.
    if (replacement == join_surfaces(source.subspan(src_start, src - src_start))) {
      continue;
    }
    regions.push_back(
        {Edit{src_start, src, std::move(replacement)}, tgt_start, tgt});
  }
  return regions;
}

std::vector<EditRegion> extract_edit_regions(std::string_view source,
                                             std::string_view target,
                                             const Granularity& granularity) {
  const auto src_tokens = segment(source, granularity);
  const auto tgt_tokens = segment(target, granularity);
  return merge_alignment(src_tokens, tgt_tokens, align(src_tokens, tgt_tokens));
}

std::vector<Edit> extract_edits(std::string_view source,
                                std::string_view target,
                                const Granularity& granularity) {
  std::vector<Edit> edits;
  for (auto& region : extract_edit_regions(source, target, granularity)) {
    edits.push_back(std::move(region.edit));
  }
  return edits;
}

std::string apply_edits(std::span<const Token> source,
                        std::span<const Edit> edits) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& edit : edits) {
    if (edit.start < pos || edit.end > source.size()) {
      throw ValidationError("edits are unsorted, overlapping or out of range");
    }
    out += join_surfaces(source.subspan(pos, edit.start - pos));
    out += edit.replacement;
    pos = edit.end;
  }
  out += join_surfaces(source.subspan(pos));
  return out;
}

std::string join_surfaces(std::span<const Token> tokens) {
  std::string out;
  for (const auto& token : tokens) out += token.surface;
  return out;
}

}  // namespace cgec
