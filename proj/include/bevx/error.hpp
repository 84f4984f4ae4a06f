#pragma once

#include <stdexcept>
#include <string>

namespace bevx {

// Base of every error raised by the library. The C API maps each subclass
// onto a bevx_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents or config documents.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Unknown backend/setting names and bad option values.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace bevx
