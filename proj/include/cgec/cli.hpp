#ifndef CGEC_CLI_HPP_
#define CGEC_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cgec::cli {

// Seed used by `augment` when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 20230815;

enum ExitCode : int { kOk = 0, kValidation = 1, kIoOrNetwork = 2 };

// Entry point for the `cgec` binary. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace cgec::cli

#endif  // CGEC_CLI_HPP_
