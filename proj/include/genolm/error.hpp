#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace genolm {

enum class ErrorCode {
  InvalidArgument,
  InvalidSymbol,
  AmbiguousBase,
  ContainsAmbiguousBase,
  SpecialTokenInStream,
  OffsetOutOfRange,
  EmptyCorpus,
  MalformedLocation,
  MissingOrigin,
  BadRow,
  UnknownSequenceId,
  InsufficientData,
  BadSmoothing,
  UnknownTokenId,
  PeerUnavailable,
  ProtocolViolation,
  Timeout,
  ContextOverflow,
  UnknownPrefixToken,
  ReferenceTooShort,
  VocabularyMismatch,
  RefMismatch,
  DegenerateLabels,
  TooFewSamples,
  SingularSystem,
  PoolTooSmall,
  EmptyInput,
  ConstantInput,
  SequenceTooShort,
  SingleCluster,
  Io,
  Format,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library. The code identifies the condition;
/// the message carries the offending position, id or value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace genolm
