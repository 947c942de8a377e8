#ifndef CGEC_UNICODE_HPP_
#define CGEC_UNICODE_HPP_

#include <cstddef>
#include <string>
#include <string_view>

namespace cgec {

// Strict UTF-8 decoding; throws ValidationError on malformed input.
std::u32string decode_utf8(std::string_view text);

std::string encode_utf8(std::u32string_view code_points);
std::string encode_utf8(char32_t code_point);

// Number of code points in valid UTF-8 text.
std::size_t code_point_count(std::string_view text);

// Unicode Normalization Form C.
std::string nfc(std::string_view text);

}  // namespace cgec

#endif  // CGEC_UNICODE_HPP_
