// Copyright 2026 The Chunkwise Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chunkwise/error.hpp"

namespace chunkwise {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingDocument: return "MissingDocument";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kProviderProtocolError: return "ProviderProtocolError";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kInvalidParent: return "InvalidParent";
    case ErrorCode::kIncompleteScores: return "IncompleteScores";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kEmptyRanking: return "EmptyRanking";
    case ErrorCode::kEmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::kDuplicateDocId: return "DuplicateDocId";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kStaleStore: return "StaleStore";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidK:
      return 2;
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kProviderProtocolError:
      return 3;
    default:
      return 4;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      message_(message) {}

}  // namespace chunkwise
