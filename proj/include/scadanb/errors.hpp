#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scadanb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EmptyInputError : public Error {
public:
  explicit EmptyInputError(const std::string& ctx) : Error("empty input: " + ctx) {}
};

class NonFiniteError : public Error {
public:
  explicit NonFiniteError(const std::string& ctx) : Error("non-finite value: " + ctx) {}
};

class MissingColumnError : public Error {
public:
  explicit MissingColumnError(const std::string& column)
      : Error("missing column: " + column), column_(column) {}
  const std::string& column() const { return column_; }

private:
  std::string column_;
};

class ParseError : public Error {
public:
  ParseError(std::size_t row, const std::string& column, const std::string& detail)
      : Error("row " + std::to_string(row) + ", column " + column + ": " + detail),
        row_(row),
        column_(column) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

private:
  std::size_t row_;
  std::string column_;
};

class InvalidConfigError : public Error {
public:
  explicit InvalidConfigError(const std::string& ctx) : Error("invalid config: " + ctx) {}
};

class DimensionMismatchError : public Error {
public:
  explicit DimensionMismatchError(const std::string& ctx)
      : Error("dimension mismatch: " + ctx) {}
};

class LengthMismatchError : public Error {
public:
  explicit LengthMismatchError(const std::string& ctx) : Error("length mismatch: " + ctx) {}
};

class ZeroTargetError : public Error {
public:
  explicit ZeroTargetError(std::size_t index)
      : Error("zero target at index " + std::to_string(index)) {}
};

class SingularCovarianceError : public Error {
public:
  explicit SingularCovarianceError(const std::string& ctx)
      : Error("singular covariance: " + ctx) {}
};

class TooFewSamplesError : public Error {
public:
  TooFewSamplesError(std::size_t have, std::size_t need)
      : Error("too few samples: have " + std::to_string(have) + ", need " +
              std::to_string(need)) {}
};

class EmptyFrameError : public Error {
public:
  explicit EmptyFrameError(const std::string& ctx) : Error("empty frame: " + ctx) {}
};

class KTooLargeError : public Error {
public:
  KTooLargeError(std::size_t k, std::size_t n)
      : Error("k = " + std::to_string(k) + " exceeds training size " + std::to_string(n)) {}
};

class WindowTooSmallError : public Error {
public:
  explicit WindowTooSmallError(const std::string& ctx) : Error("window too small: " + ctx) {}
};

class NonFiniteLossError : public Error {
public:
  explicit NonFiniteLossError(const std::string& ctx) : Error("non-finite loss: " + ctx) {}
};

class InsufficientDataError : public Error {
public:
  explicit InsufficientDataError(const std::string& ctx)
      : Error("insufficient data: " + ctx) {}
};

}  // namespace scadanb
