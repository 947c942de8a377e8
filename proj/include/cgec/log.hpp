#ifndef CGEC_LOG_HPP_
#define CGEC_LOG_HPP_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cgec::log {

using Sink = std::function<void(std::string_view)>;

// Emits a warning line. Defaults to stderr.
void warn(std::string_view message);

// Replaces the warning sink and returns the previous one. Passing an empty
// function restores stderr.
Sink set_warning_sink(Sink sink);

// Collects warnings for the lifetime of the object (tests, batch reports).
class ScopedCapture {
 public:
  ScopedCapture();
  ~ScopedCapture();
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  std::vector<std::string> messages() const;

 private:
  struct State;
  State* state_;
  Sink previous_;
};

}  // namespace cgec::log

#endif  // CGEC_LOG_HPP_
