#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hprobit {

// Exception families; the CLI maps each onto a distinct exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line(line) {}
  std::size_t line;
};

struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hprobit
