#pragma once

#include <stdexcept>
#include <string>

namespace rstdp {

/// Malformed or inconsistent input data (corpus records, trees, orders).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unparseable file content. Carries a line number when one is known.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        bare_(what) {}
  long line() const { return line_; }
  const std::string& bare_message() const { return bare_; }

 private:
  long line_ = 0;
  std::string bare_;
};

/// Tensor shape disagreement between operands.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values (empty sequences, out-of-range knobs).
class ArgumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf reached a place where only finite values are legal.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent configuration (missing feature files, dim mismatches).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corpus content that the current model/vocabulary cannot consume.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rstdp
