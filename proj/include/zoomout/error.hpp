#pragma once

#include <stdexcept>
#include <string>

namespace zoomout {

// Computation or contract failure inside the library (CLI exit code 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input file, missing path, malformed argument (CLI exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

// Mesh or map file that does not parse; carries the 1-based line number.
class ParseError : public IoError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : IoError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace zoomout
