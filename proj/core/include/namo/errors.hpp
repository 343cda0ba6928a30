#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace namo {

// Base of every error thrown by the library. Callers that only care about
// "something in namo failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NAMO_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// geometry
NAMO_DEFINE_ERROR(DegenerateInput);
NAMO_DEFINE_ERROR(NonUnitNormal);
NAMO_DEFINE_ERROR(InvalidPolygon);

// perception
NAMO_DEFINE_ERROR(EmptyCluster);

// affordance
NAMO_DEFINE_ERROR(NoLiftHypothesis);
NAMO_DEFINE_ERROR(NoPushHypothesis);

// dynamics / cito
NAMO_DEFINE_ERROR(DimensionMismatch);
NAMO_DEFINE_ERROR(SubproblemInfeasible);
NAMO_DEFINE_ERROR(MaxInnerIterations);
NAMO_DEFINE_ERROR(CitoNotConverged);

// navigation
NAMO_DEFINE_ERROR(NoPath);
NAMO_DEFINE_ERROR(OutOfBounds);
NAMO_DEFINE_ERROR(NoPlacementFound);
NAMO_DEFINE_ERROR(ExecutionDiverged);
NAMO_DEFINE_ERROR(StepLimitExceeded);

// harness
NAMO_DEFINE_ERROR(IoError);

#undef NAMO_DEFINE_ERROR

class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, std::size_t step_index)
      : Error(what + " (step " + std::to_string(step_index) + ")"),
        step_index_(step_index) {}
  std::size_t step_index() const { return step_index_; }

 private:
  std::size_t step_index_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace namo
