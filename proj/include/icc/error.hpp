#ifndef ICC_ERROR_HPP
#define ICC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace icc {

/// Base of every error raised by the library.
///
/// Each error carries a stable kebab-case identifier (e.g. "icc-at-boundary")
/// that the CLI prints and the service returns verbatim, so clients can branch
/// on it without parsing the message.
class Error : public std::runtime_error {
public:
  Error(std::string id, const std::string& message)
      : std::runtime_error(message), id_(std::move(id)) {}

  const std::string& id() const noexcept { return id_; }

private:
  std::string id_;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Input data cannot support the requested computation (no variance, etc.).
class DataError : public Error {
public:
  using Error::Error;
};

/// Malformed input text. `line()` is 1-based; 0 means "whole input".
class ParseError : public Error {
public:
  ParseError(std::string id, std::size_t line, const std::string& message)
      : Error(std::move(id), line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace icc

#endif // ICC_ERROR_HPP
