#include "dstrc/error.hpp"

namespace dstrc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedCorpus: return "MalformedCorpus";
    case ErrorCode::kUnknownSlot: return "UnknownSlot";
    case ErrorCode::kInvalidFraction: return "InvalidFraction";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTurnOutOfRange: return "TurnOutOfRange";
    case ErrorCode::kValueNotInOntology: return "ValueNotInOntology";
    case ErrorCode::kReaderFailure: return "ReaderFailure";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kConnectFailure: return "ConnectFailure";
    case ErrorCode::kUnknownSlotInOntology: return "UnknownSlotInOntology";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
  }
  return "Unknown";
}

}  // namespace dstrc
