#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revmark {

// Values are part of the C ABI (see revmark.h); append only.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  IoError = 2,
  ParseError = 3,
  // watermark
  EmptySurnameList = 10,
  DuplicateSurname = 11,
  NotEnoughKeywords = 12,
  EmptySet = 13,
  SchemeMismatch = 14,
  DuplicateCandidate = 15,
  // registry
  DuplicateKey = 20,
  UnknownSet = 21,
  NotFound = 22,
  ChainBroken = 23,
  // inject
  PageOutOfRange = 30,
  MalformedPdf = 31,
  FontResourceMissing = 32,
  IncompleteRemap = 33,
  LengthMismatch = 34,
  UnencodablePayload = 35,
  DisplayMismatch = 36,
  // detect
  DuplicateReviewId = 40,
  Infeasible = 41,
  InstanceTooLarge = 42,
  MissingAssignment = 43,
  // simulate
  InfeasibleProfile = 50,
  InvalidCounts = 51,
  // llmclient
  AuthMissing = 60,
  ProviderError = 61,
  CassetteMiss = 62,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace revmark
