#pragma once

#include <stdexcept>
#include <string>

namespace coc {

// Bad input data: unreadable files, malformed cells, invalid parameters.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally malformed input: unknown fields, wrong JSON types.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// A valid request the current state cannot satisfy (e.g. a singular
// straightening). Carries an optional hint for the caller.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string hint = {})
      : std::runtime_error(what), hint_(std::move(hint)) {}

  const std::string& hint() const { return hint_; }

 private:
  std::string hint_;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coc
