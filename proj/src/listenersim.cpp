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

#include "jndq/listenersim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "jndq/error.hpp"
#include "jndq/seeding.hpp"

namespace jndq::listenersim {
namespace {

constexpr double kTarget = 0.70710678118654752;  // sqrt(0.5)

double logistic_step(double delta, double mu, double sigma) {
  if (sigma == 0.0) return delta > mu ? 1.0 : (delta < mu ? 0.0 : 0.5);
  return 1.0 / (1.0 + std::exp(-(delta - mu) / sigma));
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; fn must only write to slot i.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
}

}  // namespace

void ListenerParams::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, "listener: " + m); };
  if (!std::isfinite(mu_db)) fail("mu_db must be finite");
  if (!(sigma_db >= 0.0) || !std::isfinite(sigma_db)) fail("sigma_db must be >= 0");
  if (guess_rate < 0.0 || guess_rate > 1.0) fail("guess_rate must lie in [0, 1]");
  if (lapse_rate < 0.0 || lapse_rate > 1.0) fail("lapse_rate must lie in [0, 1]");
  if (guess_rate + lapse_rate >= 1.0) fail("guess_rate + lapse_rate must be < 1");
}

double p_correct(const ListenerParams& p, double delta_snr_db) {
  return p.guess_rate + (1.0 - p.guess_rate - p.lapse_rate) * logistic_step(delta_snr_db, p.mu_db, p.sigma_db);
}

SimulatedListener::SimulatedListener(const ListenerParams& params) : params_(params), engine_(params.rng_seed) {
  params_.validate();
}

Answer SimulatedListener::respond(const TrialSpec& trial) {
  const double p = p_correct(static_cast<double>(trial.reference_snr_db - trial.dynamic_snr_db));
  const bool ref_first = trial.reference_position == Position::kFirst;
  if (unit_interval(engine_()) < p) return ref_first ? Answer::kFirstBetter : Answer::kSecondBetter;
  if (engine_() >> 63) return Answer::kNotDetectable;
  return ref_first ? Answer::kSecondBetter : Answer::kFirstBetter;
}

double convergence_point(const ListenerParams& params) {
  params.validate();
  if (!(kTarget > params.guess_rate && kTarget < 1.0 - params.lapse_rate)) {
    throw Error(ErrorCode::kInvalidArgument,
                "convergence_point: sqrt(0.5) lies outside the psychometric range (guess, 1 - lapse)");
  }
  if (params.sigma_db == 0.0) return params.mu_db;
  double lo = params.mu_db - 1.0, hi = params.mu_db + 1.0;
  while (p_correct(params, lo) >= kTarget) lo -= 2.0 * (params.mu_db - lo);
  while (p_correct(params, hi) < kTarget) hi += 2.0 * (hi - params.mu_db);
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (p_correct(params, mid) < kTarget ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

StaircaseSummary summarize(const std::vector<staircase::ThresholdResult>& runs) {
  StaircaseSummary s;
  double sum = 0.0;
  for (const auto& r : runs) {
    if (r.valid) {
      ++s.n_valid;
      sum += r.jnd_db;
    } else {
      ++s.n_invalid;
    }
  }
  if (s.n_valid == 0) {
    s.mean_jnd_db = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean_jnd_db = sum / static_cast<double>(s.n_valid);
  if (s.n_valid > 1) {
    double ss = 0.0;
    for (const auto& r : runs) {
      if (r.valid) ss += (r.jnd_db - s.mean_jnd_db) * (r.jnd_db - s.mean_jnd_db);
    }
    s.sd_jnd_db = std::sqrt(ss / static_cast<double>(s.n_valid - 1));
  }
  return s;
}

StaircaseSimulation simulate_staircase(const ListenerParams& params, const staircase::StaircaseConfig& config,
                                       std::size_t n_runs, unsigned threads) {
  if (n_runs == 0) throw Error(ErrorCode::kInvalidArgument, "simulate_staircase: n_runs must be >= 1");
  params.validate();
  config.validate();
  StaircaseSimulation sim;
  sim.runs.resize(n_runs);
  parallel_for(n_runs, threads, [&](std::size_t i) {
    auto run_config = config;
    run_config.order_seed = combine_seed(config.order_seed, i);
    auto run_params = params;
    run_params.rng_seed = combine_seed(params.rng_seed, i);
    SimulatedListener listener(run_params);
    staircase::StaircaseState state(run_config);
    while (!state.complete()) state.submit(listener.respond(state.current_trial()));
    sim.runs[i] = state.threshold();
  });
  sim.summary = summarize(sim.runs);
  return sim;
}

double ScreeningSimulation::pass_rate(int acceptance_k) const {
  if (n_runs == 0) return 0.0;
  std::size_t passed = 0;
  for (std::size_t c = 0; c < n_correct_histogram.size(); ++c) {
    if (static_cast<int>(c) >= acceptance_k) passed += n_correct_histogram[c];
  }
  return static_cast<double>(passed) / static_cast<double>(n_runs);
}

ScreeningSimulation simulate_screening_sessions(const ListenerParams& params,
                                                const screening::ScreeningConfig& config, std::size_t n_runs,
                                                unsigned threads) {
  if (n_runs == 0) throw Error(ErrorCode::kInvalidArgument, "simulate_screening: n_runs must be >= 1");
  params.validate();
  config.validate();
  std::vector<int> correct(n_runs);
  parallel_for(n_runs, threads, [&](std::size_t i) {
    auto run_config = config;
    run_config.order_seed = combine_seed(config.order_seed, i);
    auto run_params = params;
    run_params.rng_seed = combine_seed(params.rng_seed, i);
    SimulatedListener listener(run_params);
    screening::ScreeningSession session(run_config);
    while (!session.complete()) session.submit(listener.respond(session.current_trial()));
    correct[i] = session.n_correct();
  });
  ScreeningSimulation sim;
  sim.n_runs = n_runs;
  sim.n_correct_histogram.assign(static_cast<std::size_t>(config.n_questions) + 1, 0);
  for (int c : correct) ++sim.n_correct_histogram[static_cast<std::size_t>(c)];
  return sim;
}

double simulate_screening(const ListenerParams& params, const screening::ScreeningConfig& config,
                          std::size_t n_runs, unsigned threads) {
  return simulate_screening_sessions(params, config, n_runs, threads).pass_rate(config.acceptance_k);
}

double binomial_tail(int n, int k, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double total = 0.0;
  for (int i = k; i <= n; ++i) {
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0)) * std::pow(p, i) *
             std::pow(1.0 - p, n - i);
  }
  return std::min(total, 1.0);
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double center = (phat + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

const std::vector<Preset>& presets() {
  // Midpoints follow the laboratory means: silent room, simulated 50 dB(A)
  // noise, and loudspeaker playback.
  static const std::vector<Preset> kPresets = {
      {"silent-headphone", {9.86, 1.0, 0.5, 0.02, 0}},
      {"noisy", {11.33, 1.0, 0.5, 0.02, 0}},
      {"loudspeaker", {12.4, 1.0, 0.5, 0.02, 0}},
  };
  return kPresets;
}

std::optional<ListenerParams> find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.params;
  }
  return std::nullopt;
}

}  // namespace jndq::listenersim
