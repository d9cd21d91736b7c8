#pragma once

#include <stdexcept>
#include <string>

namespace perturb {

// Invalid configuration, flag combinations, or argument values. CLI exit code 1.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A file or stream could not be opened, read, or written. CLI exit code 2.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed contents: bad UTF-8, bad CoNLL-U, bad merge or model files. CLI exit code 2.
struct format_error : std::runtime_error {
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// A metric was asked for on empty input (zero tokens, empty hypothesis). CLI exit code 1.
struct metric_error : std::runtime_error {
  explicit metric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace perturb
