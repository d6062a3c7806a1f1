#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace prefgame {

// Base of every error the library throws on bad input or failed numerics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Mismatched dimensions between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized input. `where` carries a line/offset description.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string where)
      : Error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Non-finite loss or parameter during training.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// Corrupted solver state, e.g. a policy containing NaN.
class StateError : public Error {
 public:
  using Error::Error;
};

// Rejection sampler exceeded its attempt budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of budget before reaching its tolerance.
// Carries the best iterate found.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::vector<double> best)
      : Error(what), best_(std::move(best)) {}
  const std::vector<double>& best() const { return best_; }

 private:
  std::vector<double> best_;
};

// Invalid command-line or configuration input.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace prefgame
