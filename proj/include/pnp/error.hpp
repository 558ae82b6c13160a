#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace pnp {

// Every failure the library reports carries one of these codes so callers
// (and the fuzz harness) can distinguish error classes without parsing text.
enum class ErrorCode {
  UnassignedId,
  DuplicateId,
  AlreadyPresent,
  NotPresent,
  NotASensor,
  NotAnActuator,
  WrongNode,
  MalformedXml,
  SchemaViolation,
  InvariantViolation,
  PastEvent,
  NegativeDebit,
  MismatchedHorizon,
  MismatchedTransducers,
  UnknownChannel,
  ParseError,
  ValidationError,
  EmptyStore,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Scenario validation failure pinned to the offending field, e.g.
// "nodes[2].transducers[0].channel".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what,
                  ErrorCode cause = ErrorCode::ValidationError)
      : Error(ErrorCode::ValidationError, field + ": " + what),
        field_(std::move(field)),
        cause_(cause) {}

  const std::string& field() const noexcept { return field_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::string field_;
  ErrorCode cause_;
};

}  // namespace pnp
