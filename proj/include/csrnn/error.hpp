#pragma once

#include <stdexcept>
#include <string>

namespace csrnn {

// Base of every error raised by the library. The CLI maps these onto exit
// statuses; IoError is the only one that gets a distinct status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LabelError : public Error {
 public:
  explicit LabelError(const std::string& label)
      : Error("unknown label '" + label + "'"), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

class SplitError : public Error {
 public:
  using Error::Error;
};
class GeneratorError : public Error {
 public:
  using Error::Error;
};
class FeatureError : public Error {
 public:
  using Error::Error;
};
class BoundsError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};
class TrainingError : public Error {
 public:
  using Error::Error;
};
class SchemeError : public Error {
 public:
  using Error::Error;
};
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t sentence, const std::string& what)
      : Error("sentence " + std::to_string(sentence) + ": " + what), sentence_(sentence) {}
  std::size_t sentence() const noexcept { return sentence_; }

 private:
  std::size_t sentence_;
};

}  // namespace csrnn
