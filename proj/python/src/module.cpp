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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jndq/analysis.hpp"
#include "jndq/audio.hpp"
#include "jndq/cli.hpp"
#include "jndq/error.hpp"
#include "jndq/hash.hpp"
#include "jndq/listenersim.hpp"
#include "jndq/screening.hpp"
#include "jndq/staircase.hpp"

namespace py = pybind11;
using namespace jndq;

namespace {

PyObject* g_error = nullptr;

listenersim::ListenerParams listener(double mu_db, double sigma_db, double guess_rate, double lapse_rate,
                                     std::uint64_t seed) {
  listenersim::ListenerParams p;
  p.mu_db = mu_db;
  p.sigma_db = sigma_db;
  p.guess_rate = guess_rate;
  p.lapse_rate = lapse_rate;
  p.rng_seed = seed;
  return p;
}

py::dict threshold_dict(const staircase::ThresholdResult& r) {
  py::dict d;
  d["threshold_snr_db"] = r.threshold_snr_db;
  d["jnd_db"] = r.jnd_db;
  d["n_reversals_used"] = r.n_reversals_used;
  d["valid"] = r.valid;
  return d;
}

analysis::Tail parse_tail(const std::string& tail) {
  if (tail == "two") return analysis::Tail::kTwo;
  if (tail == "one") return analysis::Tail::kOne;
  throw Error(ErrorCode::kInvalidArgument, "tail must be 'two' or 'one'");
}

unsigned default_threads(unsigned threads) {
  return threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the jndq C++ core";
  m.attr("__version__") = JNDQ_VERSION;

  g_error = PyErr_NewException("jndq._core.JndqError", PyExc_ValueError, nullptr);
  m.add_object("JndqError", py::handle(g_error));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(g_error)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(g_error, inst.ptr());
    }
  });

  m.def("sha256_hex", [](const py::bytes& data) { return sha256_hex(std::string_view(data)); }, py::arg("data"));

  m.def(
      "mix_at_snr",
      [](const std::vector<double>& speech, int sample_rate, double snr_db, std::uint64_t seed) {
        const auto r = audio::mix_at_snr({speech, sample_rate}, snr_db, seed);
        return py::make_tuple(r.audio.samples, r.gain, r.clipped);
      },
      py::arg("speech"), py::arg("sample_rate"), py::arg("snr_db"), py::arg("seed"),
      "Returns (samples, noise gain, clipped sample count).");
  m.def(
      "measure_snr",
      [](const std::vector<double>& clean, const std::vector<double>& degraded, int sample_rate) {
        return audio::measure_snr({clean, sample_rate}, {degraded, sample_rate});
      },
      py::arg("clean"), py::arg("degraded"), py::arg("sample_rate") = 16000);

  m.def(
      "threshold_from_reversals",
      [](const std::vector<int>& reversals, int reference_snr_db) {
        return threshold_dict(staircase::threshold_from_reversals(reversals, reference_snr_db));
      },
      py::arg("reversals"), py::arg("reference_snr_db") = 50);

  m.def(
      "p_correct",
      [](double delta_db, double mu_db, double sigma_db, double guess_rate, double lapse_rate) {
        return listenersim::p_correct(listener(mu_db, sigma_db, guess_rate, lapse_rate, 0), delta_db);
      },
      py::arg("delta_db"), py::arg("mu_db"), py::arg("sigma_db") = 1.0, py::arg("guess_rate") = 0.5,
      py::arg("lapse_rate") = 0.02);
  m.def(
      "convergence_point",
      [](double mu_db, double sigma_db, double guess_rate, double lapse_rate) {
        return listenersim::convergence_point(listener(mu_db, sigma_db, guess_rate, lapse_rate, 0));
      },
      py::arg("mu_db"), py::arg("sigma_db") = 1.0, py::arg("guess_rate") = 0.5, py::arg("lapse_rate") = 0.02);

  m.def(
      "simulate_staircase",
      [](double mu_db, std::size_t n_runs, double sigma_db, double guess_rate, double lapse_rate, std::uint64_t seed,
         std::uint64_t order_seed, unsigned threads) {
        staircase::StaircaseConfig cfg;
        cfg.order_seed = order_seed;
        const auto sim = [&] {
          py::gil_scoped_release release;
          return listenersim::simulate_staircase(listener(mu_db, sigma_db, guess_rate, lapse_rate, seed), cfg,
                                                 n_runs, default_threads(threads));
        }();
        py::list jnds;
        for (const auto& r : sim.runs) jnds.append(r.valid ? py::cast(r.jnd_db) : py::none());
        py::dict d;
        d["mean_jnd_db"] = sim.summary.mean_jnd_db;
        d["sd_jnd_db"] = sim.summary.sd_jnd_db;
        d["n_valid"] = sim.summary.n_valid;
        d["n_invalid"] = sim.summary.n_invalid;
        d["jnd_db"] = jnds;
        return d;
      },
      py::arg("mu_db"), py::arg("n_runs"), py::arg("sigma_db") = 1.0, py::arg("guess_rate") = 0.5,
      py::arg("lapse_rate") = 0.02, py::arg("seed") = 0, py::arg("order_seed") = 0, py::arg("threads") = 0);

  m.def(
      "simulate_screening",
      [](int jnd_level_db, std::size_t n_runs, double mu_db, double sigma_db, double guess_rate, double lapse_rate,
         std::uint64_t seed, std::uint64_t order_seed, unsigned threads) {
        screening::ScreeningConfig cfg;
        cfg.jnd_level_db = jnd_level_db;
        cfg.order_seed = order_seed;
        py::gil_scoped_release release;
        const auto sim = listenersim::simulate_screening_sessions(
            listener(mu_db, sigma_db, guess_rate, lapse_rate, seed), cfg, n_runs, default_threads(threads));
        std::vector<double> rates;
        for (int k = 1; k <= cfg.n_questions; ++k) rates.push_back(sim.pass_rate(k));
        return rates;
      },
      py::arg("jnd_level_db"), py::arg("n_runs"), py::arg("mu_db"), py::arg("sigma_db") = 1.0,
      py::arg("guess_rate") = 0.5, py::arg("lapse_rate") = 0.02, py::arg("seed") = 0, py::arg("order_seed") = 0,
      py::arg("threads") = 0, "Pass rates for acceptance criteria k = 1..4.");

  m.def("binomial_tail", &listenersim::binomial_tail, py::arg("n"), py::arg("k"), py::arg("p"));
  m.def(
      "wilson_interval",
      [](std::size_t successes, std::size_t n, double z) {
        const auto ci = listenersim::wilson_interval(successes, n, z);
        return py::make_tuple(ci.low, ci.high);
      },
      py::arg("successes"), py::arg("n"), py::arg("z") = 2.5758293035489004);

  m.def("pcc", [](const std::vector<double>& x, const std::vector<double>& y) { return analysis::pcc(x, y); });
  m.def("srcc", [](const std::vector<double>& x, const std::vector<double>& y) { return analysis::srcc(x, y); });
  m.def("rmse", [](const std::vector<double>& x, const std::vector<double>& y) { return analysis::rmse(x, y); });
  m.def(
      "fisher_z_test",
      [](double r1, std::size_t n1, double r2, std::size_t n2, const std::string& tail) {
        const auto t = analysis::fisher_z_test(r1, n1, r2, n2, parse_tail(tail));
        return py::make_tuple(t.z, t.p);
      },
      py::arg("r1"), py::arg("n1"), py::arg("r2"), py::arg("n2"), py::arg("tail") = "two",
      "Returns (z, p).");
  m.def(
      "rmse_f_test",
      [](double rmse1, std::size_t n1, double rmse2, std::size_t n2) {
        const auto t = analysis::rmse_f_test(rmse1, n1, rmse2, n2);
        return py::make_tuple(t.f, t.df_num, t.df_den, t.p);
      },
      py::arg("rmse1"), py::arg("n1"), py::arg("rmse2"), py::arg("n2"), "Returns (F, df_num, df_den, p).");

  m.def(
      "run_cli",
      [](std::vector<std::string> args, const std::string& stdin_text) {
        args.insert(args.begin(), "jndq");
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, in, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "", "Runs a jndq command in process; returns (exit code, stdout, stderr).");
}
