#include "genolm/error.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#include "genolm/parallel.hpp"

namespace genolm {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSymbol: return "InvalidSymbol";
    case ErrorCode::AmbiguousBase: return "AmbiguousBase";
    case ErrorCode::ContainsAmbiguousBase: return "ContainsAmbiguousBase";
    case ErrorCode::SpecialTokenInStream: return "SpecialTokenInStream";
    case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MalformedLocation: return "MalformedLocation";
    case ErrorCode::MissingOrigin: return "MissingOrigin";
    case ErrorCode::BadRow: return "BadRow";
    case ErrorCode::UnknownSequenceId: return "UnknownSequenceId";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::BadSmoothing: return "BadSmoothing";
    case ErrorCode::UnknownTokenId: return "UnknownTokenId";
    case ErrorCode::PeerUnavailable: return "PeerUnavailable";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ContextOverflow: return "ContextOverflow";
    case ErrorCode::UnknownPrefixToken: return "UnknownPrefixToken";
    case ErrorCode::ReferenceTooShort: return "ReferenceTooShort";
    case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::RefMismatch: return "RefMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

unsigned default_threads() noexcept {
  if (const char* env = std::getenv("GENOLM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace genolm
