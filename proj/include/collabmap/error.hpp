#pragma once

#include <stdexcept>
#include <string>

namespace collabmap {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument supplied by a caller (bad threshold,
/// unknown format name, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace collabmap
