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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "jndq/audio.hpp"
#include "jndq/error.hpp"
#include "jndq/hash.hpp"
#include "jndq/listenersim.hpp"
#include "jndq/service.hpp"
#include "jndq/trial.hpp"

namespace jndq::test {

/// A simulated participant that only sees what a real client sees: two audio
/// byte streams per trial. It recovers their SNRs by hashing the bytes against
/// the stimulus manifest and hands the pair to a SimulatedListener.
class SimClient {
 public:
  using Fetch = std::function<std::vector<std::uint8_t>(const std::string& url)>;

  SimClient(const audio::StimulusManifest& manifest, const listenersim::ListenerParams& params, Fetch fetch)
      : listener_(params), fetch_(std::move(fetch)) {
    for (const auto& e : manifest.entries) snr_by_hash_[e.sha256] = e.snr_db;
    reference_ = manifest.reference_level;
  }

  Answer decide(int trial_index, const std::string& url_a, const std::string& url_b) {
    const int a = snr_of(fetch_(url_a));
    const int b = snr_of(fetch_(url_b));
    if (a != reference_ && b != reference_) throw Error(ErrorCode::kInvalidArgument, "pair lacks the reference");
    TrialSpec t;
    t.trial_index = trial_index;
    t.reference_snr_db = reference_;
    t.reference_position = a == reference_ ? Position::kFirst : Position::kSecond;
    t.dynamic_snr_db = a == reference_ ? b : a;
    return listener_.respond(t);
  }

 private:
  int snr_of(const std::vector<std::uint8_t>& bytes) const {
    const auto it = snr_by_hash_.find(sha256_hex(bytes));
    if (it == snr_by_hash_.end()) throw Error(ErrorCode::kInvalidArgument, "served bytes match no manifest entry");
    return it->second;
  }

  listenersim::SimulatedListener listener_;
  Fetch fetch_;
  std::map<std::string, int> snr_by_hash_;
  int reference_ = 50;
};

inline std::string token_of(const std::string& url) { return url.substr(url.rfind('/') + 1); }

/// Drives one in-process session to completion and returns its result document.
inline nlohmann::json run_session(service::SessionStore& store, const std::string& id, SimClient& client) {
  for (;;) {
    const auto r = store.get_next_trial(id);
    const auto answer = client.decide(r.trial_index, r.stimulus_a_url, r.stimulus_b_url);
    const auto ack = store.post_answer(id, r.trial_index, to_string(answer));
    if (ack.complete) break;
  }
  return store.get_result(id);
}

inline SimClient::Fetch store_fetch(service::SessionStore& store) {
  return [&store](const std::string& url) { return store.serve_stimulus(token_of(url)); };
}

}  // namespace jndq::test
