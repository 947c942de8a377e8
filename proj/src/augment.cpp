#include "cgec/augment.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "cgec/error.hpp"
#include "cgec/fileio.hpp"
#include "cgec/log.hpp"
#include "cgec/unicode.hpp"

namespace cgec {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Found {
  std::string entity;
  CharSpan span;
};

std::vector<Found> scan_entities(std::u32string_view text,
                                 const EntityLexicon& lexicon) {
  std::vector<Found> found;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (const std::string* key = lexicon.longest_key_at(text, pos)) {
      const std::size_t len = decode_utf8(*key).size();
      found.push_back({*key, {pos, pos + len}});
      pos += len;
    } else {
      ++pos;
    }
  }
  return found;
}

// Points (insertions) only conflict when strictly inside the span.
bool touches(const CharSpan& span, std::size_t start, std::size_t end) {
  if (start == end) return span.start < start && start < span.end;
  return span.start < end && start < span.end;
}

struct Splice {
  CharSpan span;
  std::u32string text;
};

std::string splice(std::u32string_view text, std::vector<Splice> splices) {
  std::sort(splices.begin(), splices.end(),
            [](const Splice& a, const Splice& b) { return a.span.start < b.span.start; });
  std::u32string out;
  std::size_t pos = 0;
  for (const auto& s : splices) {
    out.append(text.substr(pos, s.span.start - pos));
    out.append(s.text);
    pos = s.span.end;
  }
  out.append(text.substr(pos));
  return encode_utf8(out);
}

const EntityOccurrence& occurrence_for(std::span<const SubstitutableEntity> entities,
                                       const Substitution& sub) {
  for (const auto& e : entities) {
    if (e.entity == sub.entity) {
      if (sub.occurrence_index >= e.occurrences.size()) break;
      return e.occurrences[sub.occurrence_index];
    }
  }
  throw ValidationError("plan substitutes '" + sub.entity +
                        "' at an occurrence that is not substitutable");
}

AugmentationPlan plan_from_choices(const ParallelPair& pair,
                                   std::span<const SubstitutableEntity> entities,
                                   const EntityLexicon& lexicon,
                                   std::span<const std::size_t> choices,
                                   std::uint64_t seed) {
  AugmentationPlan plan{pair.id, {}, seed};
  for (std::size_t e = 0; e < entities.size(); ++e) {
    const auto& subs = lexicon.substitutes(entities[e].entity);
    for (std::size_t k = 0; k < entities[e].occurrences.size(); ++k) {
      plan.substitutions.push_back({entities[e].entity, subs[choices[e]], k});
    }
  }
  return plan;
}

ParallelPair apply_with_entities(
    const ParallelPair& pair, std::span<const SubstitutableEntity> entities,
    const AugmentationPlan& plan, std::string id) {
  const std::u32string ungrammatical = decode_utf8(pair.ungrammatical);
  const std::u32string grammatical = decode_utf8(pair.grammatical);
  std::vector<Splice> left;
  std::vector<Splice> right;
  for (const auto& sub : plan.substitutions) {
    const auto& occ = occurrence_for(entities, sub);
    const std::u32string replacement = decode_utf8(sub.replacement);
    left.push_back({occ.ungrammatical, replacement});
    right.push_back({occ.grammatical, replacement});
  }
  ParallelPair out;
  out.id = std::move(id);
  out.ungrammatical = splice(ungrammatical, std::move(left));
  out.grammatical = splice(grammatical, std::move(right));
  out.error_type = pair.error_type;
  out.source = PairSource::Augmented;
  out.parent_id = pair.id;
  return out;
}

std::vector<Edit> shift_with_entities(std::span<const Edit> parent_edits,
                                      std::span<const SubstitutableEntity> entities,
                                      const AugmentationPlan& plan) {
  std::vector<Edit> shifted(parent_edits.begin(), parent_edits.end());
  for (const auto& sub : plan.substitutions) {
    const auto& occ = occurrence_for(entities, sub);
    const auto delta = static_cast<std::ptrdiff_t>(decode_utf8(sub.replacement).size()) -
                       static_cast<std::ptrdiff_t>(occ.ungrammatical.end -
                                                   occ.ungrammatical.start);
    for (std::size_t i = 0; i < parent_edits.size(); ++i) {
      if (occ.ungrammatical.end <= parent_edits[i].start) {
        shifted[i].start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(shifted[i].start) + delta);
        shifted[i].end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(shifted[i].end) + delta);
      }
    }
  }
  return shifted;
}

std::vector<std::size_t> random_choices(std::span<const SubstitutableEntity> entities,
                                        const EntityLexicon& lexicon,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> choices;
  for (const auto& e : entities) {
    choices.push_back(static_cast<std::size_t>(rng() % lexicon.substitutes(e.entity).size()));
  }
  return choices;
}

std::optional<ParallelPair> checked_apply(const ParallelPair& pair,
                                          std::span<const SubstitutableEntity> entities,
                                          const AugmentationPlan& plan,
                                          std::string id) {
  ParallelPair augmented = apply_with_entities(pair, entities, plan, std::move(id));
  const Granularity chars = Granularity::chars();
  const auto parent_edits = extract_edits(pair.ungrammatical, pair.grammatical, chars);
  const auto expected = shift_with_entities(parent_edits, entities, plan);
  const auto actual =
      extract_edits(augmented.ungrammatical, augmented.grammatical, chars);
  if (actual != expected) {
    log::warn("augmentation of '" + pair.id +
              "' would move its edits; plan discarded");
    return std::nullopt;
  }
  return augmented;
}

}  // namespace

void EntityLexicon::add(std::string entity, std::vector<std::string> substitutes) {
  if (entity.empty()) throw ValidationError("empty entity surface");
  if (entries_.contains(entity)) {
    throw ValidationError("entity '" + entity + "' listed twice");
  }
  std::vector<std::string> unique;
  for (auto& s : substitutes) {
    if (s.empty()) throw ValidationError("empty substitute for '" + entity + "'");
    if (s == entity) {
      throw ValidationError("entity '" + entity + "' lists itself as a substitute");
    }
    if (std::find(unique.begin(), unique.end(), s) == unique.end()) {
      unique.push_back(std::move(s));
    }
  }
  if (unique.empty()) throw ValidationError("entity '" + entity + "' has no substitutes");
  std::u32string key = decode_utf8(entity);
  for (const auto& s : unique) decode_utf8(s);
  max_key_length_ = std::max(max_key_length_, key.size());
  keys_.emplace(std::move(key), entity);
  entries_.emplace(std::move(entity), std::move(unique));
}

EntityLexicon EntityLexicon::parse(std::string_view content, std::string_view origin) {
  EntityLexicon lexicon;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::vector<std::string> fields;
    std::string_view rest = lines[i];
    while (true) {
      const std::size_t tab = rest.find('\t');
      fields.emplace_back(trim(rest.substr(0, tab)));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    try {
      std::string entity = std::move(fields.front());
      fields.erase(fields.begin());
      lexicon.add(std::move(entity), std::move(fields));
    } catch (const ValidationError& e) {
      throw ParseError(i + 1, e.what(), std::string(origin));
    }
  }
  return lexicon;
}

EntityLexicon EntityLexicon::from_file(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

const std::vector<std::string>& EntityLexicon::substitutes(const std::string& entity) const {
  auto it = entries_.find(entity);
  if (it == entries_.end()) throw ValidationError("unknown entity '" + entity + "'");
  return it->second;
}

const std::string* EntityLexicon::longest_key_at(std::u32string_view text,
                                                 std::size_t pos) const {
  const std::size_t longest = std::min(max_key_length_, text.size() - pos);
  for (std::size_t len = longest; len >= 1; --len) {
    auto it = keys_.find(std::u32string(text.substr(pos, len)));
    if (it != keys_.end()) return &it->second;
  }
  return nullptr;
}

std::vector<SubstitutableEntity> find_substitutable_spans(
    const ParallelPair& pair, const EntityLexicon& lexicon) {
  if (lexicon.empty()) return {};
  const std::u32string ungrammatical = decode_utf8(pair.ungrammatical);
  const std::u32string grammatical = decode_utf8(pair.grammatical);
  const auto left = scan_entities(ungrammatical, lexicon);
  const auto right = scan_entities(grammatical, lexicon);
  if (left.empty() || right.empty()) return {};

  const Granularity chars = Granularity::chars();
  const auto src_tokens = segment(pair.ungrammatical, chars);
  const auto tgt_tokens = segment(pair.grammatical, chars);
  const Alignment alignment = align(src_tokens, tgt_tokens);
  const auto regions = merge_alignment(src_tokens, tgt_tokens, alignment);
  constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> counterpart(ungrammatical.size(), kUnmatched);
  for (const auto& step : alignment.steps) {
    if (step.op == AlignOp::Match) counterpart[step.source] = step.target;
  }

  auto clear_of_edits = [&regions](const CharSpan& span, bool source_side) {
    return std::none_of(regions.begin(), regions.end(), [&](const EditRegion& r) {
      return source_side ? touches(span, r.edit.start, r.edit.end)
                         : touches(span, r.target_start, r.target_end);
    });
  };
  auto occurrences_of = [](const std::vector<Found>& found, const std::string& key) {
    std::vector<CharSpan> spans;
    for (const auto& f : found) {
      if (f.entity == key) spans.push_back(f.span);
    }
    return spans;
  };

  std::vector<SubstitutableEntity> result;
  std::set<std::string> visited;
  for (const auto& f : left) {
    if (!visited.insert(f.entity).second) continue;
    const auto lhs = occurrences_of(left, f.entity);
    const auto rhs = occurrences_of(right, f.entity);
    if (lhs.size() != rhs.size()) continue;
    bool ok = true;
    SubstitutableEntity entity{f.entity, {}};
    for (std::size_t k = 0; k < lhs.size() && ok; ++k) {
      ok = clear_of_edits(lhs[k], true) && clear_of_edits(rhs[k], false);
      // Rank-paired occurrences must be aligned to each other char by char.
      for (std::size_t c = 0; ok && c < lhs[k].end - lhs[k].start; ++c) {
        ok = counterpart[lhs[k].start + c] == rhs[k].start + c;
      }
      entity.occurrences.push_back({lhs[k], rhs[k]});
    }
    if (ok) result.push_back(std::move(entity));
  }
  return result;
}

std::optional<AugmentationPlan> plan_augmentation(const ParallelPair& pair,
                                                  const EntityLexicon& lexicon,
                                                  std::uint64_t seed) {
  const auto entities = find_substitutable_spans(pair, lexicon);
  if (entities.empty()) return std::nullopt;
  return plan_from_choices(pair, entities, lexicon,
                           random_choices(entities, lexicon, seed), seed);
}

std::optional<ParallelPair> apply_plan(const ParallelPair& pair,
                                       const EntityLexicon& lexicon,
                                       const AugmentationPlan& plan,
                                       std::string id) {
  const auto entities = find_substitutable_spans(pair, lexicon);
  return checked_apply(pair, entities, plan, std::move(id));
}

std::vector<Edit> shift_edits(std::span<const Edit> parent_edits,
                              const ParallelPair& parent,
                              const EntityLexicon& lexicon,
                              const AugmentationPlan& plan) {
  const auto entities = find_substitutable_spans(parent, lexicon);
  return shift_with_entities(parent_edits, entities, plan);
}

std::optional<ParallelPair> augment_pair(const ParallelPair& pair,
                                         const EntityLexicon& lexicon,
                                         std::uint64_t seed) {
  const auto entities = find_substitutable_spans(pair, lexicon);
  if (entities.empty()) return std::nullopt;
  const auto plan = plan_from_choices(pair, entities, lexicon,
                                      random_choices(entities, lexicon, seed), seed);
  return checked_apply(pair, entities, plan, pair.id + "-aug");
}

std::vector<ParallelPair> augment_corpus(std::span<const ParallelPair> pairs,
                                         const EntityLexicon& lexicon,
                                         std::size_t factor, std::uint64_t seed) {
  if (factor < 1) throw ValidationError("augmentation factor must be at least 1");
  constexpr std::uint64_t kCap = std::uint64_t{1} << 62;
  std::vector<ParallelPair> out;
  for (std::size_t index = 0; index < pairs.size(); ++index) {
    const ParallelPair& pair = pairs[index];
    const auto entities = find_substitutable_spans(pair, lexicon);
    if (entities.empty()) continue;

    std::vector<std::uint64_t> radix;
    std::uint64_t plans = 1;
    for (const auto& e : entities) {
      radix.push_back(lexicon.substitutes(e.entity).size());
      plans = plans > kCap / radix.back() ? kCap : plans * radix.back();
    }
    const std::uint64_t pair_seed = splitmix64(seed ^ splitmix64(index));
    std::mt19937_64 rng(pair_seed);

    // Plan indices in mixed radix, entity 0 least significant.
    std::vector<std::uint64_t> picks;
    if (plans <= factor) {
      for (std::uint64_t p = 0; p < plans; ++p) picks.push_back(p);
      for (std::size_t i = picks.size(); i > 1; --i) {
        std::swap(picks[i - 1], picks[rng() % i]);
      }
    } else {
      std::set<std::uint64_t> seen;
      while (picks.size() < factor) {
        const std::uint64_t p = rng() % plans;
        if (seen.insert(p).second) picks.push_back(p);
      }
    }

    std::size_t variant = 0;
    for (std::uint64_t p : picks) {
      std::vector<std::size_t> choices;
      for (std::uint64_t r : radix) {
        choices.push_back(static_cast<std::size_t>(p % r));
        p /= r;
      }
      const auto plan = plan_from_choices(pair, entities, lexicon, choices, pair_seed);
      auto augmented = checked_apply(pair, entities, plan,
                                     pair.id + "-aug" + std::to_string(variant + 1));
      if (!augmented) continue;
      ++variant;
      out.push_back(std::move(*augmented));
    }
  }
  return out;
}

}  // namespace cgec
