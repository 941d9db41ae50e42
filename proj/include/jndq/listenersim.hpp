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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jndq/screening.hpp"
#include "jndq/staircase.hpp"
#include "jndq/trial.hpp"

namespace jndq::listenersim {

/// Logistic psychometric function with guess and lapse rates:
///   p(d) = guess + (1 - guess - lapse) * logistic((d - mu) / sigma)
/// where d is the reference-minus-dynamic SNR difference in dB.
/// sigma == 0 gives a hard threshold at mu.
struct ListenerParams {
  double mu_db = 10.0;
  double sigma_db = 1.0;
  double guess_rate = 0.5;
  double lapse_rate = 0.02;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

double p_correct(const ListenerParams& params, double delta_snr_db);

/// Stateful listener: each respond() consumes its private RNG stream.
class SimulatedListener {
 public:
  explicit SimulatedListener(const ListenerParams& params);

  const ListenerParams& params() const noexcept { return params_; }
  double p_correct(double delta_snr_db) const { return listenersim::p_correct(params_, delta_snr_db); }

  /// Correct with probability p_correct(reference - dynamic); otherwise picks
  /// the dynamic slot or "not detectable" with equal probability.
  Answer respond(const TrialSpec& trial);

 private:
  ListenerParams params_;
  std::mt19937_64 engine_;
};

/// Difference at which p_correct == sqrt(0.5), the 2-down/1-up target, by
/// bisection to 1e-6 dB. Throws when sqrt(0.5) is outside (guess, 1 - lapse).
double convergence_point(const ListenerParams& params);

struct StaircaseSummary {
  double mean_jnd_db = 0.0;
  double sd_jnd_db = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
};

struct StaircaseSimulation {
  std::vector<staircase::ThresholdResult> runs;
  StaircaseSummary summary;
};

/// Run i uses order seed combine_seed(config.order_seed, i) and listener seed
/// combine_seed(params.rng_seed, i); results do not depend on `threads`.
StaircaseSimulation simulate_staircase(const ListenerParams& params, const staircase::StaircaseConfig& config,
                                       std::size_t n_runs, unsigned threads = 1);

StaircaseSummary summarize(const std::vector<staircase::ThresholdResult>& runs);

struct ScreeningSimulation {
  std::size_t n_runs = 0;
  std::vector<std::size_t> n_correct_histogram;  // index = number correct

  /// Fraction of sessions with at least k correct.
  double pass_rate(int acceptance_k) const;
};

ScreeningSimulation simulate_screening_sessions(const ListenerParams& params,
                                                const screening::ScreeningConfig& config, std::size_t n_runs,
                                                unsigned threads = 1);

/// Pass rate under config.acceptance_k.
double simulate_screening(const ListenerParams& params, const screening::ScreeningConfig& config,
                          std::size_t n_runs, unsigned threads = 1);

/// Closed-form P(Binomial(n, p) >= k).
double binomial_tail(int n, int k, double p);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 2.5758 gives 99%.
Interval wilson_interval(std::size_t successes, std::size_t n, double z);

/// Named listener presets built from laboratory group means; they exercise
/// the machinery and are not calibrated to any individual.
struct Preset {
  std::string name;
  ListenerParams params;
};
const std::vector<Preset>& presets();
std::optional<ListenerParams> find_preset(const std::string& name);

}  // namespace jndq::listenersim
