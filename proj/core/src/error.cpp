#include "emview/error.hpp"

namespace emview {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::AmbiguousAttribute: return "AmbiguousAttribute";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateAttribute: return "DuplicateAttribute";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::NotAProbabilityVector: return "NotAProbabilityVector";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ReservedWord: return "ReservedWord";
    case ErrorCode::MultipleUnionByUpdate: return "MultipleUnionByUpdate";
    case ErrorCode::RecursiveComputedBy: return "RecursiveComputedBy";
    case ErrorCode::CyclicComputedBy: return "CyclicComputedBy";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::InvalidUpdateKey: return "InvalidUpdateKey";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::WindowNotAllowed: return "WindowNotAllowed";
    case ErrorCode::EmptyComponent: return "EmptyComponent";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace emview
