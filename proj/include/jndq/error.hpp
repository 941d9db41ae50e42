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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jndq {

/// Failure categories shared by the library, the service and the CLI.
/// The service maps them onto HTTP statuses and the CLI onto exit codes.
enum class ErrorCode {
  kInvalidArgument,     // precondition violated by the caller
  kInvalidConfig,       // configuration fails its invariants
  kUnsupportedFormat,   // audio container or sample format we do not read
  kUnsupportedChannels, // more than one channel
  kTruncatedFile,       // header or payload shorter than declared
  kIo,                  // filesystem failure
  kSilentInput,         // zero-power speech
  kExcessiveClipping,   // more than 0.1% of samples clipped
  kLengthMismatch,
  kUndefinedStatistic,  // e.g. correlation of a constant vector
  kSessionComplete,     // mutation of a finished session
  kSessionIncomplete,   // result requested before completion
  kNotFound,
  kStale,               // answer for a trial that is not pending
  kExpired,
  kMissingStimuli,      // stimulus set not registered / incomplete
  kSchema,              // malformed input document
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace jndq
