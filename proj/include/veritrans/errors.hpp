#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace veritrans {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised by the tokenizer on a character outside the formula alphabet.
class LexError : public Error {
public:
  LexError(std::size_t position, std::string snippet)
      : Error("lex error at offset " + std::to_string(position) + " near \"" + snippet + "\""),
        position_(position),
        snippet_(std::move(snippet)) {}

  std::size_t position() const { return position_; }
  const std::string& snippet() const { return snippet_; }

private:
  std::size_t position_;
  std::string snippet_;
};

class ParseError : public Error {
public:
  using Error::Error;
};

// Reserved-prefix violations and other CNF compilation failures.
class CompileError : public Error {
public:
  using Error::Error;
};

// Malformed DIMACS or other structured text.
class FormatError : public Error {
public:
  using Error::Error;
};

// Solver exceeded its decision budget; the instance is too hard, the
// answer is never wrong.
class ResourceError : public Error {
public:
  using Error::Error;
};

// Truth-table oracle asked to enumerate more variables than its hard cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

// A document had no terms after tokenization.
class EmptyTextError : public Error {
public:
  using Error::Error;
};

class RangeError : public Error {
public:
  using Error::Error;
};

class EmptyInputError : public Error {
public:
  using Error::Error;
};

class DegenerateSampleError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Verbalization hit formula variables with no mapping entry.
class MissingAliasError : public Error {
public:
  explicit MissingAliasError(std::vector<std::string> missing)
      : Error(make_message(missing)), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const { return missing_; }

private:
  static std::string make_message(const std::vector<std::string>& missing) {
    std::string msg = "no mapping entry for:";
    for (const auto& name : missing) msg += " " + name;
    return msg;
  }

  std::vector<std::string> missing_;
};

class TransportError : public Error {
public:
  using Error::Error;
};

class AuthError : public Error {
public:
  using Error::Error;
};

class SchemaError : public Error {
public:
  using Error::Error;
};

class DatasetFormatError : public Error {
public:
  using Error::Error;
};

}  // namespace veritrans
