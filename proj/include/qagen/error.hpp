#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qagen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (JSON, fixtures, completions). `offset` is a byte
// offset into the input when one is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset = 0, std::string raw = {})
      : Error(what), offset_(offset), raw_(std::move(raw)) {}

  std::size_t offset() const { return offset_; }
  const std::string& raw() const { return raw_; }

 private:
  std::size_t offset_;
  std::string raw_;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : Error(what), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace qagen
