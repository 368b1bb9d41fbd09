#include "arground/error.hpp"

namespace arground {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidKey: return "InvalidKey";
    case ErrorCode::ArgumentMapInvalid: return "ArgumentMapInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateApi: return "DuplicateApi";
    case ErrorCode::SchemaInvalid: return "SchemaInvalid";
    case ErrorCode::DatasetInvalid: return "DatasetInvalid";
    case ErrorCode::NoArgumentObject: return "NoArgumentObject";
    case ErrorCode::MalformedArguments: return "MalformedArguments";
    case ErrorCode::GoldSchemaMismatch: return "GoldSchemaMismatch";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::ApiMismatch: return "ApiMismatch";
    case ErrorCode::UnknownSlot: return "UnknownSlot";
    case ErrorCode::EmptySlotResponse: return "EmptySlotResponse";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::LogCorrupt: return "LogCorrupt";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::IngestError: return "IngestError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Usage;
    case ErrorCode::BackendError:
    case ErrorCode::ReplayMiss:
    case ErrorCode::AuthError:
      return ErrorCategory::Backend;
    default:
      return ErrorCategory::Data;
  }
}

namespace {

std::string format_what(ErrorCode code, const std::string& message) {
  std::string what(error_name(code));
  if (!message.empty()) {
    what += ": ";
    what += message;
  }
  return what;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string subject)
    : std::runtime_error(format_what(code, message)),
      code_(code),
      subject_(std::move(subject)) {}

}  // namespace arground
