#pragma once

#include <stdexcept>
#include <string>

namespace trafusion {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinates or values outside the admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation needs at least one data cell / record and got none.
class NoDataError : public Error {
 public:
  using Error::Error;
};

/// Fields defined on different grids were combined.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV or config), with location information.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// A configuration file is missing a required key or holds an invalid one.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace trafusion
