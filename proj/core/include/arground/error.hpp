#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arground {

enum class ErrorCode {
  InvalidKey,
  ArgumentMapInvalid,
  ParseError,
  DuplicateApi,
  SchemaInvalid,
  DatasetInvalid,
  NoArgumentObject,
  MalformedArguments,
  GoldSchemaMismatch,
  EmptyCorpus,
  AlignmentError,
  ApiMismatch,
  UnknownSlot,
  EmptySlotResponse,
  BackendError,
  ReplayMiss,
  AuthError,
  LogCorrupt,
  EmptyDataset,
  DegenerateSplit,
  UnknownDomain,
  IngestError,
  InvalidArgument,
  IoError,
};

/// Stable name used in fixtures, logs and exception messages.
std::string_view error_name(ErrorCode code) noexcept;

/// How a failure should be reported by the command-line tool.
enum class ErrorCategory { Usage, Data, Backend };

ErrorCategory error_category(ErrorCode code) noexcept;

/// The single exception type thrown by the library.
///
/// `subject` names the offending item when there is one: a slot, a key, a
/// dialogue id, the text span that failed to parse.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace arground
