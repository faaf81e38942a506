#pragma once

#include <stdexcept>
#include <string>

namespace hbship {

enum class ErrorKind {
  InvalidArgument,  // bad call / precondition / config value
  Io,
  Data,             // malformed or invariant-violating input data
  NotFound,         // unknown ship / missing parameter
  Internal
};

/// Base exception for the library. The C API maps `kind()` onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Data error, optionally tied to a 1-based line of an input file.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, long line = 0)
      : Error(ErrorKind::Data, line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error(ErrorKind::NotFound, what) {}
};

}  // namespace hbship
