#include "revmark/error.hpp"

namespace revmark {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptySurnameList: return "EmptySurnameList";
    case ErrorCode::DuplicateSurname: return "DuplicateSurname";
    case ErrorCode::NotEnoughKeywords: return "NotEnoughKeywords";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::DuplicateCandidate: return "DuplicateCandidate";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::UnknownSet: return "UnknownSet";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ChainBroken: return "ChainBroken";
    case ErrorCode::PageOutOfRange: return "PageOutOfRange";
    case ErrorCode::MalformedPdf: return "MalformedPdf";
    case ErrorCode::FontResourceMissing: return "FontResourceMissing";
    case ErrorCode::IncompleteRemap: return "IncompleteRemap";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnencodablePayload: return "UnencodablePayload";
    case ErrorCode::DisplayMismatch: return "DisplayMismatch";
    case ErrorCode::DuplicateReviewId: return "DuplicateReviewId";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::MissingAssignment: return "MissingAssignment";
    case ErrorCode::InfeasibleProfile: return "InfeasibleProfile";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::CassetteMiss: return "CassetteMiss";
  }
  return "Unknown";
}

}  // namespace revmark
