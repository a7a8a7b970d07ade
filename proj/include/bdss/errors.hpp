#pragma once

#include <stdexcept>

namespace bdss {

// Bad wiring or invalid settings: shape/channel mismatches, impossible config values.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Valid-looking configuration that produces impossible geometry (empty conv output etc).
class geometry_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated files; the message carries the byte offset where known.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bdss
