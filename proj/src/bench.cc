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

#include "fgc/bench.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <vector>

#include "fgc/error.h"
#include "fgc/packer.h"
#include "fgc/quantizer.h"
#include "fgc/spectral.h"

namespace fgc {
namespace {

template <typename F>
double fastest(std::size_t repeats, F&& body) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    best = std::min(best, dt.count());
  }
  // Clock granularity floor; keeps throughputs finite for tiny inputs.
  return std::max(best, 1e-9);
}

// Prevents the optimiser from discarding a stage's result.
volatile double g_sink = 0.0;

}  // namespace

BenchResult measure_profile(std::size_t elements, std::size_t repeats, double t_comm,
                            unsigned seed) {
  if (elements < 2 || repeats == 0) throw InvalidArgument("bench: need elements >= 2, repeats >= 1");
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.05);
  std::vector<double> gradient(elements);
  for (double& g : gradient) g = normal(rng);

  const auto quantizer = tune_eps(-1.0, 1.0, kDefaultBits, kDefaultMantissa);
  const SparsificationSpec spec{0.7, DropMode::kCount, Domain::kFrequency};
  const Spectrum spectrum = dft_forward(gradient);
  const auto truncated = truncate(spectrum, spec);

  BenchResult out;
  auto& t = out.timings;
  t.elements = elements;
  t.bytes = 4.0 * static_cast<double>(elements);

  t.precision = fastest(repeats, [&] {
    std::vector<double> v = gradient;
    half_round_trip(v);
    std::vector<float> f(v.begin(), v.end());
    g_sink = static_cast<double>(encode_block(quantizer, f).size());
  });
  t.transform = fastest(repeats, [&] { g_sink = dft_forward(gradient).coefficients[0].real(); });
  t.selection = fastest(repeats, [&] { g_sink = static_cast<double>(truncate(spectrum, spec).mask.size()); });
  t.packing = fastest(repeats, [&] {
    g_sink = static_cast<double>(pack<Complex>(truncated.spectrum.coefficients).dense.size());
  });

  const double gb = t.bytes / 1e9;
  out.profile = {gb / t.precision, gb / t.transform, gb / t.packing, gb / t.selection, t_comm};
  return out;
}

}  // namespace fgc
