// Copyright 2026 The FGC Authors. All Rights Reserved.
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
// =============================================================================

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fail. Pass criterion numbers as arguments to run a
// subset. "--known-failure N" still runs and reports criterion N but does not
// let its failure alone fail the run.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fgc/codec.h"
#include "fgc/costmodel.h"
#include "fgc/io.h"
#include "fgc/packer.h"
#include "fgc/quantizer.h"
#include "fgc/simulator.h"
#include "fgc/spectral.h"
#include "oracles.h"

namespace fgc {
namespace {

using testing::l2;
using testing::l2_diff;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  // 0 means unlimited
  std::function<Outcome()> check;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- 1 -----------------------------------------------------------------------

Outcome dft_oracle() {
  std::vector<std::size_t> lengths;
  for (std::size_t n = 1; n <= 64; ++n) lengths.push_back(n);
  lengths.insert(lengths.end(), {1000, 1024, 4096});

  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = lengths[static_cast<std::size_t>(trial) % lengths.size()];
    const auto x = testing::random_vector(rng, n);
    const auto fast = dft_forward(x);
    const auto slow = testing::naive_dft(x);
    for (std::size_t k = 0; k < slow.size(); ++k)
      worst = std::max(worst, std::abs(fast.coefficients[k] - slow[k]));
  }
  return {worst <= 1e-9, fmt("200 vectors, max abs error %.3g", worst)};
}

// --- 2 -----------------------------------------------------------------------

Outcome quantizer_exhaustive() {
  const auto q = tune_eps(-1.0, 1.0, 8, 3);
  std::vector<std::string> failures;
  std::vector<float> table(q.code_count());
  for (uint32_t c = 0; c < q.code_count(); ++c) table[c] = decode(q, c);

  if (encode(q, 0.0f) != 0 || decode(q, 0) != 0.0f) failures.push_back("zero code");
  if (encode(q, q.eps) != 1) failures.push_back("encode(eps) != 1");
  if (encode(q, 2 * q.max) != encode(q, q.max) || decode(q, encode(q, -2.0f)) != decode(q, encode(q, -1.0f)))
    failures.push_back("clamping");

  // monotone over a dense sweep of [-1.25, 1.25]
  const int points = 1000000;
  float prev = -std::numeric_limits<float>::infinity();
  int non_monotone = 0;
  for (int i = 0; i < points; ++i) {
    const float x = static_cast<float>(-1.25 + 2.5 * i / (points - 1));
    const float y = decode(q, encode(q, x));
    if (y < prev) ++non_monotone;
    prev = y;
  }
  if (non_monotone) failures.push_back(fmt("%d monotonicity breaks", non_monotone));

  // positive lattice: spacing doubles every 2^m codes
  std::vector<float> pos;
  for (float v : table)
    if (v > 0) pos.push_back(v);
  std::sort(pos.begin(), pos.end());
  int bad_spacing = 0;
  std::size_t run = 1, doublings = 0;
  for (std::size_t i = 2; i < pos.size(); ++i) {
    const double ratio = (double(pos[i]) - pos[i - 1]) / (double(pos[i - 1]) - pos[i - 2]);
    if (ratio == 1.0) {
      ++run;
    } else if (ratio == 2.0) {
      if (doublings > 0 && run != 8) ++bad_spacing;
      ++doublings;
      run = 1;
    } else {
      ++bad_spacing;
    }
  }
  if (bad_spacing || doublings == 0) failures.push_back("spacing does not double every 8 codes");

  // nearest-code oracle within one step
  std::mt19937 rng(17);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  int off = 0;
  for (int i = 0; i < 100000; ++i) {
    const float x = u(rng);
    const float got = decode(q, encode(q, x));
    float best = table[0];
    for (float v : table)
      if (std::abs(v - x) < std::abs(best - x)) best = v;
    // the gap between neighbouring codes around x
    float below = -std::numeric_limits<float>::infinity(), above = std::numeric_limits<float>::infinity();
    for (float v : table) {
      if (v <= got) below = std::max(below, v == got ? below : v);
      if (v > got) above = std::min(above, v);
    }
    const float step = std::max(std::isfinite(above) ? above - got : 0.0f, std::isfinite(below) ? got - below : 0.0f);
    if (std::abs(got - best) > step * 1.0001f) ++off;
  }
  if (off) failures.push_back(fmt("%d points more than one step from the nearest code", off));

  std::string detail = fmt("eps=%.6g P=%u actual_min=%.6g", q.eps, q.pos_count, actual_min(q));
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// --- 3 -----------------------------------------------------------------------

Outcome packer() {
  const std::vector<float> sparse{1.5f, 0, -2.0f, 0, 0.25f, 0, 0};
  const std::vector<uint8_t> status{1, 0, 1, 0, 1, 0, 0};
  const auto packed = pack<float>(sparse);
  const bool example = prefix_sum(status) == std::vector<uint32_t>{1, 1, 2, 2, 3, 3, 3} &&
                       packed.dense == std::vector<float>{1.5f, -2.0f, 0.25f} &&
                       packed.bitmap.bytes() == std::vector<uint8_t>{0b10101000} && unpack(packed) == sparse;

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> log_len(0.0, std::log(1e6));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<float> value(0.5f, 2.0f);
  int round_trip_failures = 0, scan_failures = 0;
  std::size_t longest = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = trial == 0 ? 1000000 : static_cast<std::size_t>(std::exp(log_len(rng)));
    longest = std::max(longest, n);
    const double density = unit(rng);
    std::vector<float> v(n, 0.0f);
    std::vector<uint8_t> s(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (unit(rng) < density) {
        v[i] = value(rng);
        s[i] = 1;
      }
    if (unpack(pack<float>(v)) != v) ++round_trip_failures;
    std::vector<uint32_t> oracle(n);
    uint32_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) oracle[i] = acc += s[i];
    if (prefix_sum(s) != oracle) ++scan_failures;
  }
  return {example && round_trip_failures == 0 && scan_failures == 0,
          fmt("worked example %s; 1000 vectors up to n=%zu: %d round-trip, %d prefix-sum failures",
              example ? "exact" : "MISMATCH", longest, round_trip_failures, scan_failures)};
}

// --- 4 -----------------------------------------------------------------------

Outcome energy_assumption() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 4096);
  int violations = 0;
  double worst = 0.0;
  for (double theta : {0.1, 0.5, 0.9}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto v = testing::random_vector(rng, len(rng));
      const auto v_hat = dft_inverse(truncate(dft_forward(v), {theta, DropMode::kEnergy}).spectrum);
      const double nv = l2(v);
      const double err = l2_diff(v, v_hat);
      worst = std::max(worst, err / (theta * nv));
      if (err > theta * nv * (1 + 1e-12) || l2(v_hat) > nv * (1 + 1e-12)) ++violations;
    }
  }
  return {violations == 0, fmt("3000 trials, %d violations, max |v-v_hat|/(theta|v|) = %.6f", violations, worst)};
}

// --- 5 -----------------------------------------------------------------------

Outcome compression_ratio_check() {
  CodecConfig c;
  c.sparsification = {0.7, DropMode::kCount};
  c.quantizer = tune_eps(-1, 1, 8, 3);
  const double analytic = compression_ratio(c, 1, false);
  const bool exact = std::abs(analytic - 32.0 / 2.4) < 1e-12 && std::round(analytic * 100) == 1333;

  const std::size_t n = std::size_t{1} << 16;
  std::mt19937_64 rng(5);
  const auto v = testing::random_vector(rng, n);
  const std::vector<std::vector<double>> samples{v};
  c.quantizer = calibrate(samples, 8, 3, c.sparsification, c.chunk_size);
  const auto bytes = serialize(compress(v, c));
  const double measured = 4.0 * static_cast<double>(n) / static_cast<double>(bytes.size());
  const double predicted = compression_ratio(c, n, true);
  const double rel = std::abs(measured - predicted) / predicted;
  return {exact && rel <= 0.03 && std::abs(predicted - 9.4) < 0.05,
          fmt("analytic %.4f (displayed %.2f); n=2^16 measured %.4f vs predicted %.4f (%.2f%% off)", analytic,
              analytic, measured, predicted, 100 * rel)};
}

// --- 6-8: training experiments ------------------------------------------------

ProblemSpec quadratic_spec() {
  ProblemSpec s;
  s.kind = ProblemKind::kQuadratic;
  s.samples = 512;
  s.dim = 50;
  s.noise = 0.1;
  s.seed = 1;
  return s;
}

TrainConfig base_train(std::size_t iterations, uint64_t seed) {
  TrainConfig c;
  c.workers = 4;
  c.batch_size = 8;
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

Outcome floor_ordering() {
  const Problem p(quadratic_spec());
  const std::size_t iterations = 20000, tail = iterations / 10;
  std::vector<double> floors;
  std::string detail;
  for (double theta : {0.0, 0.3, 0.6, 0.9}) {
    double total = 0.0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      auto c = base_train(iterations, seed);
      c.eta0 = 1.0 / (8.0 * p.lipschitz());
      c.theta = theta;
      c.mode = DropMode::kCount;
      const auto trace = run(p, c);
      double sum = 0.0;
      for (std::size_t t = iterations - tail; t < iterations; ++t) sum += trace.rows[t].grad_sq_norm;
      total += sum / static_cast<double>(tail);
    }
    floors.push_back(total / 20.0);
    detail += fmt("%stheta=%.1f: %.4g", detail.empty() ? "" : ", ", theta, floors.back());
  }
  bool increasing = true;
  for (std::size_t i = 1; i < floors.size(); ++i) increasing &= floors[i] > floors[i - 1];
  return {increasing, "tail mean |grad f|^2 " + detail};
}

Outcome diminishing_convergence() {
  const Problem p(quadratic_spec());
  int converged = 0;
  std::size_t slowest = 0;
  double worst_min = 0.0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = base_train(20000, seed);
    c.lr_schedule = LrSchedule::kDiminishing;
    c.eta0 = 1.0 / (4.0 * p.lipschitz());
    c.lr_decay = 100.0;
    c.theta_schedule = ThetaSchedule::kDiminishing;
    c.theta_cap = 0.99;
    c.mode = DropMode::kEnergy;
    const auto trace = run(p, c);
    double best = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (const auto& r : trace.rows) {
      best = std::min(best, r.grad_sq_norm);
      if (best < 1e-4 && hit == 0) hit = r.t + 1;
    }
    worst_min = std::max(worst_min, best);
    if (hit) {
      ++converged;
      slowest = std::max(slowest, hit);
    }
  }
  return {converged == 20, fmt("%d/20 seeds below 1e-4 (slowest at iteration %zu, worst min %.3g)", converged,
                               slowest, worst_min)};
}

Outcome mixed_schedule() {
  const std::size_t iterations = 4000;
  std::string detail;
  bool pass = true;
  for (auto kind : {ProblemKind::kQuadratic, ProblemKind::kLogistic}) {
    auto spec = quadratic_spec();
    spec.kind = kind;
    const Problem p(spec);
    double worst = 0.0;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      auto plain = base_train(iterations, seed);
      plain.compression = false;
      auto mixed = base_train(iterations, seed);
      mixed.theta_schedule = ThetaSchedule::kStepwise;
      mixed.theta = 0.9;
      mixed.theta_after = 0.0;
      mixed.switch_iteration = iterations / 2;
      const double f_plain = run(p, plain).rows.back().loss;
      const double f_mixed = run(p, mixed).rows.back().loss;
      worst = std::max(worst, std::abs(f_mixed - f_plain) / f_plain);
    }
    pass &= worst <= 0.02;
    detail += fmt("%s%s worst rel gap %.3g%%", detail.empty() ? "" : ", ", std::string(to_string(kind)).c_str(),
                  100 * worst);
  }
  return {pass, detail + " over 5 matched seeds"};
}

// --- 9 -----------------------------------------------------------------------

Outcome frequency_vs_time() {
  std::mt19937_64 rng(9);
  int wins = 0, generated = 0;
  const std::size_t n = 1024;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v;
    do {
      v = testing::smooth_signal(rng, n);
      ++generated;
    } while (testing::low_band_energy_fraction(v) < 0.9);
    const auto freq = dft_inverse(truncate(dft_forward(v), {0.7, DropMode::kCount}).spectrum);
    const auto time = sparsify_time(v, {0.7, DropMode::kCount, Domain::kTime}).values;
    const bool lower_error = l2_diff(v, freq) < l2_diff(v, time);
    const bool better_signs = testing::sign_agreement(v, freq) > testing::sign_agreement(v, time);
    wins += lower_error && better_signs;
  }
  return {wins >= 95, fmt("frequency domain better on both measures in %d/100 trials (%d signals drawn)", wins,
                          generated)};
}

// --- 10 ----------------------------------------------------------------------

Outcome cost_model() {
  const ThroughputProfile base{100, 100, 34, 100, 1.0};
  const auto rows = sweep(base, 0.1, 10.0, 50);
  bool monotone = true, infeasible_seen = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i].min_k) {
      infeasible_seen = true;
      continue;
    }
    if (infeasible_seen || !rows[i - 1].min_k || !(*rows[i].min_k > *rows[i - 1].min_k)) monotone = false;
  }
  auto p6 = base;
  p6.t_comm = 6.0;
  const bool infeasible = !min_beneficial_k(p6).has_value();
  const auto k1 = min_beneficial_k(base);
  const bool k_ok = k1 && std::abs(*k1 - 1.218) < 5e-4;
  return {monotone && infeasible && k_ok,
          fmt("50-point sweep %s; t_comm=6 %s; t_comm=1 min k = %.4f", monotone ? "monotone" : "NOT monotone",
              infeasible ? "infeasible" : "FEASIBLE", k1 ? *k1 : -1.0)};
}

// --- 11 ----------------------------------------------------------------------

struct Fixture {
  const char* file;
  MessageHeader header;
  std::vector<uint32_t> kept;
  std::vector<double> head;  // first decoded values
};

std::vector<Fixture> fixtures() {
  return {
      {"count_q8.fgc",
       {1, 0, 100, 32, 0.5f, std::bit_cast<float>(0xc131e84du), std::bit_cast<float>(0x4131e84du),
        std::bit_cast<float>(0x39300000u), 8, 3},
       {15, 15, 15, 1},
       {-0.15625, 0.14063045382499695, 0.5363701581954956, 0.6511644721031189}},
      {"energy_half_q6.fgc",
       {1, kFlagHalfPass | kFlagEnergyMode, 64, 64, 0.3f, std::bit_cast<float>(0xc18328feu),
        std::bit_cast<float>(0x418328feu), std::bit_cast<float>(0x3d800000u), 6, 2},
       {6},
       {0.5859375, 0.6022956967353821, 0.593161940574646, 0.5573452711105347}},
      {"passthrough.fgc",
       {1, kFlagPassthrough, 40, 16, 0.25f, 0.0f, 0.0f, 0.0f, 32, 23},
       {11, 11, 5},
       {0.2004907876253128, 0.29855117201805115, 0.5163668394088745, 0.4577084183692932}},
  };
}

Outcome golden_fixtures() {
  int good = 0;
  std::string detail;
  for (const auto& f : fixtures()) {
    std::string problem;
    try {
      const auto bytes = read_bytes(std::string(FGC_FIXTURE_DIR) + "/" + f.file);
      const auto m = deserialize(bytes);
      std::vector<uint32_t> kept;
      for (const auto& c : m.chunks) kept.push_back(c.kept);
      const auto values = decompress(m);
      if (!(m.header == f.header)) problem = "header fields differ";
      else if (kept != f.kept) problem = "kept counts differ";
      else if (serialize(m) != bytes) problem = "re-serialization not byte-exact";
      else if (values.size() != m.header.original_len) problem = "decoded length differs";
      for (std::size_t i = 0; problem.empty() && i < f.head.size(); ++i)
        if (std::abs(values[i] - f.head[i]) > 1e-6) problem = "decoded values differ";
    } catch (const std::exception& e) {
      problem = e.what();
    }
    if (problem.empty()) ++good;
    else detail += fmt("; %s: %s", f.file, problem.c_str());
  }
  return {good == 3, fmt("%d/3 fixtures match", good) + detail};
}

}  // namespace
}  // namespace fgc

int main(int argc, char** argv) {
  using namespace fgc;
  const std::vector<Criterion> criteria{
      {1, "DFT matches naive oracle", 10, dft_oracle},
      {2, "quantizer exhaustive checks", 5, quantizer_exhaustive},
      {3, "packer worked example and round trips", 0, packer},
      {4, "energy mode error bound", 0, energy_assumption},
      {5, "compression ratio", 0, compression_ratio_check},
      {6, "fixed-rate floor grows with theta", 120, floor_ordering},
      {7, "diminishing schedule converges", 120, diminishing_convergence},
      {8, "stepwise theta recovers uncompressed loss", 0, mixed_schedule},
      {9, "frequency beats time-domain sparsification", 0, frequency_vs_time},
      {10, "cost model", 0, cost_model},
      {11, "wire format golden fixtures", 0, golden_fixtures},
  };
  std::set<int> selected, known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc) {
      known.insert(std::atoi(argv[++i]));
    } else {
      selected.insert(std::atoi(argv[i]));
    }
  }

  int failed = 0, unexpected = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", secs);
    if (c.time_limit_s > 0 && secs > c.time_limit_s) {
      o.pass = false;
      timing += fmt(", over the %.0f s budget", c.time_limit_s);
    }
    const bool is_known = known.count(c.id) > 0;
    std::printf("%s  %2d  %s: %s (%s)%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str(), is_known ? (o.pass ? " [listed as known failure]" : " [known failure]") : "");
    std::fflush(stdout);
    failed += !o.pass;
    unexpected += !o.pass && !is_known;
  }
  std::printf("%d failed, %d unexpected\n", failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
