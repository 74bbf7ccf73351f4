// sonimap - error types shared across the library
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_ERROR_HPP
#define SONIMAP_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sonimap {

/// Base class for every error thrown by the library. Parsers and pipeline
/// stages never throw anything else on malformed input.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File-level parse failure. `line` is 1-based; 0 means the position is not
/// line-addressable (binary payloads, whole-file problems).
class ParseError : public Error {
public:
  ParseError(std::string path, std::size_t line, const std::string& msg)
      : Error(format(path, line, msg)), path_(std::move(path)), line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

private:
  static std::string format(const std::string& path, std::size_t line,
                            const std::string& msg) {
    if (line == 0) return path + ": " + msg;
    return path + ":" + std::to_string(line) + ": " + msg;
  }

  std::string path_;
  std::size_t line_;
};

/// Binary payload shorter than the header promised.
class TruncationError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Trajectory timestamps not strictly increasing.
class MonotonicityError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Two dataset entries share the same index key.
class DuplicateKeyError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Audio codec the WAV reader does not handle.
class UnsupportedCodecError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Sensor optical axis too close to vertical to define a 2D heading.
class HeadingDegenerateError : public Error {
public:
  using Error::Error;
};

}  // namespace sonimap

#endif  // SONIMAP_ERROR_HPP
