#ifndef CGEC_TEXT_HPP_
#define CGEC_TEXT_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cgec {

std::string_view trim(std::string_view text);

// Single left-to-right pass replacing each "{name}" slot with its value.
// Substituted values are never rescanned; unknown braces are copied as is.
std::string substitute_placeholders(
    std::string_view text,
    const std::vector<std::pair<std::string_view, std::string_view>>& slots);

// Non-overlapping occurrences of `needle`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace cgec

#endif  // CGEC_TEXT_HPP_
