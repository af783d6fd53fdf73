#pragma once

#include <stdexcept>
#include <string>

namespace turnover {

// Bad user input: malformed files, unknown columns, missing artifacts.
// The CLI maps these to exit code 2.
class UserInputError : public std::runtime_error {
 public:
  explicit UserInputError(const std::string& what) : std::runtime_error(what) {}
};

class SchemaError : public UserInputError {
 public:
  explicit SchemaError(const std::string& what) : UserInputError(what) {}
};

class ParseError : public UserInputError {
 public:
  explicit ParseError(const std::string& what) : UserInputError(what) {}
};

// Training failed (diverged, ran out of data). CLI maps to exit code 1.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace turnover
