#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace protodown {

enum class ErrorCode {
  design,
  alignment,
  format,
  syntax,
  state,
  normalization,
  imputation,
  config,
  degenerate_data,
  precondition,
  transport,
  unsupported,
  validation,
  not_found,
};

std::string_view to_string(ErrorCode code);

/// Base for every error the engine raises. `detail` carries optional
/// machine-oriented context (offending ids, line/column, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

template <ErrorCode C>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& message, std::string detail = {})
      : Error(C, message, std::move(detail)) {}
};

using DesignError = TypedError<ErrorCode::design>;
using AlignmentError = TypedError<ErrorCode::alignment>;
using FormatError = TypedError<ErrorCode::format>;
using SyntaxError = TypedError<ErrorCode::syntax>;
using StateError = TypedError<ErrorCode::state>;
using NormalizationError = TypedError<ErrorCode::normalization>;
using ImputationError = TypedError<ErrorCode::imputation>;
using ConfigError = TypedError<ErrorCode::config>;
using DegenerateDataError = TypedError<ErrorCode::degenerate_data>;
using PreconditionError = TypedError<ErrorCode::precondition>;
using UnsupportedError = TypedError<ErrorCode::unsupported>;
using ValidationError = TypedError<ErrorCode::validation>;
using NotFoundError = TypedError<ErrorCode::not_found>;

enum class TransportFailure { timeout, connection, http_status, malformed_body, no_fixture };

class TransportError : public Error {
 public:
  TransportError(TransportFailure failure, const std::string& message, int status = 0)
      : Error(ErrorCode::transport, message), failure_(failure), status_(status) {}

  TransportFailure failure() const noexcept { return failure_; }
  int status() const noexcept { return status_; }

 private:
  TransportFailure failure_;
  int status_;
};

}  // namespace protodown
