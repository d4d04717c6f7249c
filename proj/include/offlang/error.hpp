#pragma once

#include <stdexcept>
#include <string>

namespace offlang {

// Error hierarchy shared by all modules. Every failure carries a message
// naming the offending file/column/row/shape so callers can report it as-is.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A required column or file structure is missing.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// File contents violate the data contract (unknown label, duplicate id, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes do not conform for an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Token id outside the model vocabulary.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong model mode (train vs eval).
class StateError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace offlang
