#pragma once

#include <stdexcept>
#include <string>

namespace crackseg {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Bytes were readable but not a supported image (bad magic, 16-bit, CMYK, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A histogram range with fewer than two populated bins cannot be split.
class DegenerateRange : public Error {
 public:
  using Error::Error;
};

}  // namespace crackseg
