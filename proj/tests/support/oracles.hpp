// Independent reference computations used by the test suites. Nothing here
// calls into the library's alignment or scoring code.
#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace oracle {

// Plain O(nm) Levenshtein distance over code points (or any element type).
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Exhaustive recursion over edit scripts; exponential, tiny inputs only.
inline std::size_t brute_force_distance(std::u32string_view a, std::u32string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t rest = brute_force_distance(a.substr(1), b.substr(1));
  if (a[0] == b[0]) return rest;
  return 1 + std::min({rest, brute_force_distance(a.substr(1), b),
                       brute_force_distance(a, b.substr(1))});
}

struct SpanEdit {
  std::size_t start;
  std::size_t end;
  std::u32string replacement;
};

// When two strings differ in one contiguous region, trimming the common prefix
// and suffix yields that region.
inline SpanEdit single_region(std::u32string_view src, std::u32string_view tgt) {
  std::size_t p = 0;
  while (p < src.size() && p < tgt.size() && src[p] == tgt[p]) ++p;
  std::size_t s = 0;
  while (s < src.size() - p && s < tgt.size() - p &&
         src[src.size() - 1 - s] == tgt[tgt.size() - 1 - s]) {
    ++s;
  }
  return {p, src.size() - s, std::u32string(tgt.substr(p, tgt.size() - s - p))};
}

struct Tally {
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Counts matches by trying every system edit against every unused gold edit.
template <typename E>
Tally brute_force_match(const std::vector<E>& system, const std::vector<E>& gold) {
  std::vector<bool> used(gold.size(), false);
  Tally t;
  for (const auto& s : system) {
    bool hit = false;
    for (std::size_t g = 0; g < gold.size() && !hit; ++g) {
      if (!used[g] && std::tie(s.start, s.end, s.replacement) ==
                          std::tie(gold[g].start, gold[g].end, gold[g].replacement)) {
        used[g] = true;
        hit = true;
      }
    }
    if (hit) ++t.tp; else ++t.fp;
  }
  t.fn = gold.size() - t.tp;
  return t;
}

inline double fhalf(double p, double r) {
  const double b2 = 0.25;
  return (p + r) == 0 ? 0.0 : (1 + b2) * p * r / (b2 * p + r);
}

}  // namespace oracle
