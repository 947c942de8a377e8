#include "cgec/log.hpp"

#include <iostream>
#include <mutex>

namespace cgec::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex mu;
  return mu;
}

Sink& current_sink() {
  static Sink sink;
  return sink;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) {
    current_sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

Sink set_warning_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

struct ScopedCapture::State {
  std::vector<std::string> messages;
};

ScopedCapture::ScopedCapture() : state_(new State) {
  State* state = state_;
  previous_ = set_warning_sink(
      [state](std::string_view m) { state->messages.emplace_back(m); });
}

ScopedCapture::~ScopedCapture() {
  set_warning_sink(std::move(previous_));
  delete state_;
}

std::vector<std::string> ScopedCapture::messages() const {
  std::lock_guard lock(sink_mutex());
  return state_->messages;
}

}  // namespace cgec::log
