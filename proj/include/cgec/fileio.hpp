#ifndef CGEC_FILEIO_HPP_
#define CGEC_FILEIO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/text.hpp"

namespace cgec {

// Whole-file read; throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);

// Splits on '\n', dropping a trailing '\r' from each line. A final newline
// does not produce an empty trailing line.
std::vector<std::string> split_lines(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace cgec

#endif  // CGEC_FILEIO_HPP_
