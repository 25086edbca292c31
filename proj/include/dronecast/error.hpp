#pragma once

#include <stdexcept>
#include <string>

namespace dronecast {

// Bad input values: out-of-range arguments, violated type invariants,
// malformed config content. CLI maps this to exit code 1.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File-level problems: unreadable input, unwritable output. Exit code 2.
class io_error : public std::runtime_error {
public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested operating point the model cannot reach (e.g. target SNR
// beyond the zero-distance limit).
class unreachable_error : public validation_error {
public:
  explicit unreachable_error(const std::string& msg) : validation_error(msg) {}
};

}  // namespace dronecast
