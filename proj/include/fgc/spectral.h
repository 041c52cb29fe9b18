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

#ifndef FGC_SPECTRAL_H_
#define FGC_SPECTRAL_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fgc {

using Complex = std::complex<double>;

// Half spectrum of a length-n real signal: floor(n/2) + 1 bins, unnormalised
// forward convention. Bin 0 and (for even n) bin n/2 are purely real.
struct Spectrum {
  std::vector<Complex> coefficients;
  std::size_t n = 0;

  std::size_t bins() const { return coefficients.size(); }
};

enum class DropMode : uint8_t { kCount, kEnergy };
enum class Domain : uint8_t { kFrequency, kTime };

struct SparsificationSpec {
  double theta = 0.0;  // dropout ratio in [0, 1]
  DropMode mode = DropMode::kCount;
  Domain domain = Domain::kFrequency;
};

DropMode parse_drop_mode(std::string_view name);
std::string_view to_string(DropMode mode);

// One byte per element; 1 = kept.
using KeepMask = std::vector<uint8_t>;

struct TruncatedSpectrum {
  Spectrum spectrum;
  KeepMask mask;
};

struct SparseSignal {
  std::vector<double> values;
  KeepMask mask;
};

Spectrum dft_forward(std::span<const double> signal);
std::vector<double> dft_inverse(const Spectrum& spectrum);

// Number of times bin k appears in the full spectrum (1 for DC and Nyquist,
// 2 otherwise). Used for Parseval-weighted energies.
double bin_weight(std::size_t k, std::size_t n);

// (1/n) * sum_k w_k |V_k|^2, equal to the squared L2 norm of the signal.
double parseval_energy(const Spectrum& spectrum);

std::vector<double> bin_magnitudes(const Spectrum& spectrum);

// Count mode zeroes the ceil(theta * bins) smallest-magnitude bins (ties drop
// the lower index first). Energy mode zeroes the longest run of
// smallest-magnitude bins whose weighted energy stays within theta^2 of the
// total, which gives ||v - v_hat|| <= theta ||v|| exactly.
TruncatedSpectrum truncate(const Spectrum& spectrum,
                           const SparsificationSpec& spec);

// Same selection rules applied to raw samples.
SparseSignal sparsify_time(std::span<const double> signal,
                           const SparsificationSpec& spec);

struct AssumptionCheck {
  double error_ratio = 0.0;
  bool norm_nonexpansive = true;
  bool holds = true;
};

AssumptionCheck assumption_check(std::span<const double> v,
                                 std::span<const double> v_hat, double theta);

// IEEE binary16 round trip, round-to-nearest-even.
uint16_t float_to_half(float x);
float half_to_float(uint16_t h);
void half_round_trip(std::span<double> values);

}  // namespace fgc

#endif  // FGC_SPECTRAL_H_
