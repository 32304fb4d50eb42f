#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emview {

/// Diagnostic codes shared by every layer of the engine. The CLI prints the
/// code name alongside the message, so names are part of the user surface.
enum class ErrorCode {
  // relation-core
  UnknownAttribute,
  AmbiguousAttribute,
  TypeMismatch,
  DimensionMismatch,
  SchemaMismatch,
  DuplicateKey,
  NonFinite,
  DuplicateAttribute,
  // stats kernels
  NonPositiveDefinite,
  NotAProbabilityVector,
  SingularDesign,
  // sql frontend
  SyntaxError,
  ReservedWord,
  MultipleUnionByUpdate,
  RecursiveComputedBy,
  CyclicComputedBy,
  UnknownRelation,
  InvalidUpdateKey,
  UnknownFunction,
  ArityMismatch,
  WindowNotAllowed,
  // models and maintenance
  EmptyComponent,
  InvalidParameters,
  LabelMismatch,
  // plumbing
  ParseError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace emview
