#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace sacn {

// Invalid configuration, shapes, or unknown names supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// API misuse, e.g. calling backward on a non-scalar node.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The replay buffer cannot serve a batch yet.
class NotReadyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NaN/Inf reached a loss, gradient or stored transition.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void log_warning(const std::string& message) {
  static int emitted = 0;
  constexpr int kMaxWarnings = 20;
  if (emitted < kMaxWarnings) {
    std::cerr << "warning: " << message << '\n';
  } else if (emitted == kMaxWarnings) {
    std::cerr << "warning: further warnings suppressed\n";
  }
  ++emitted;
}

}  // namespace sacn
