// Copyright 2026 The JNDQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "jndq/error.hpp"

namespace jndq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kUnsupportedChannels: return "channels_unsupported";
    case ErrorCode::kTruncatedFile: return "truncated_file";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kSilentInput: return "silent_input";
    case ErrorCode::kExcessiveClipping: return "excessive_clipping";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kUndefinedStatistic: return "undefined_statistic";
    case ErrorCode::kSessionComplete: return "session_complete";
    case ErrorCode::kSessionIncomplete: return "not_complete";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kStale: return "stale_trial";
    case ErrorCode::kExpired: return "expired";
    case ErrorCode::kMissingStimuli: return "missing_stimuli";
    case ErrorCode::kSchema: return "schema_error";
  }
  return "unknown";
}

}  // namespace jndq
