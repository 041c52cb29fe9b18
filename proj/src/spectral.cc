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

#include "fgc/spectral.h"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>
#include <unordered_map>

#include "fgc/error.h"

namespace fgc {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe but executing a plan on new arrays is.
// Plans live for the lifetime of the process.
PlanPair plans_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, PlanPair> local;
  if (auto it = local.find(n); it != local.end()) return it->second;

  static std::mutex mu;
  static std::unordered_map<std::size_t, PlanPair> global;
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = global.try_emplace(n);
  if (inserted) {
    const int len = static_cast<int>(n);
    const std::size_t bins = n / 2 + 1;
    double* real = fftw_alloc_real(n);
    fftw_complex* cplx = fftw_alloc_complex(bins);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    it->second.forward = fftw_plan_dft_r2c_1d(len, real, cplx, flags);
    it->second.inverse = fftw_plan_dft_c2r_1d(len, cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
  }
  local.emplace(n, it->second);
  return it->second;
}

// Indices sorted by ascending magnitude, lower index first on ties.
std::vector<std::size_t> ascending_order(std::span<const double> magnitude) {
  std::vector<std::size_t> order(magnitude.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitude[a] < magnitude[b];
  });
  return order;
}

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw InvalidArgument("theta must lie in [0, 1], got " + std::to_string(theta));
}

// Shared selection rule for both domains. `weight` scales squared magnitudes
// into energy units.
KeepMask select_kept(std::span<const double> magnitude,
                     std::span<const double> weight,
                     const SparsificationSpec& spec) {
  check_theta(spec.theta);
  const std::size_t count = magnitude.size();
  KeepMask mask(count, 1);
  if (spec.theta == 0.0 || count == 0) return mask;

  const auto order = ascending_order(magnitude);
  if (spec.mode == DropMode::kCount) {
    const double target = std::ceil(spec.theta * static_cast<double>(count) - 1e-9);
    const auto drop = std::min(count, static_cast<std::size_t>(std::max(0.0, target)));
    for (std::size_t i = 0; i < drop; ++i) mask[order[i]] = 0;
    return mask;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    total += weight[i] * magnitude[i] * magnitude[i];
  const double budget = spec.theta * spec.theta * total;
  double dropped = 0.0;
  for (std::size_t idx : order) {
    const double e = weight[idx] * magnitude[idx] * magnitude[idx];
    if (dropped + e > budget) break;
    dropped += e;
    mask[idx] = 0;
  }
  return mask;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

DropMode parse_drop_mode(std::string_view name) {
  if (name == "count") return DropMode::kCount;
  if (name == "energy") return DropMode::kEnergy;
  throw InvalidArgument("unknown drop mode '" + std::string(name) + "'");
}

std::string_view to_string(DropMode mode) {
  return mode == DropMode::kCount ? "count" : "energy";
}

Spectrum dft_forward(std::span<const double> signal) {
  if (signal.empty()) throw InvalidArgument("dft_forward: empty signal");
  for (double x : signal)
    if (!std::isfinite(x)) throw InvalidArgument("dft_forward: non-finite input");

  const std::size_t n = signal.size();
  Spectrum out;
  out.n = n;
  out.coefficients.resize(n / 2 + 1);
  std::vector<double> in(signal.begin(), signal.end());
  fftw_execute_dft_r2c(plans_for(n).forward, in.data(),
                       reinterpret_cast<fftw_complex*>(out.coefficients.data()));
  out.coefficients.front().imag(0.0);
  if (n % 2 == 0) out.coefficients.back().imag(0.0);
  return out;
}

std::vector<double> dft_inverse(const Spectrum& spectrum) {
  const std::size_t n = spectrum.n;
  if (n == 0) throw InvalidArgument("dft_inverse: zero-length spectrum");
  if (spectrum.bins() != n / 2 + 1)
    throw InvalidArgument("dft_inverse: " + std::to_string(spectrum.bins()) +
                          " bins inconsistent with n = " + std::to_string(n));

  // c2r overwrites its input.
  std::vector<Complex> scratch = spectrum.coefficients;
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans_for(n).inverse,
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= scale;
  return out;
}

double bin_weight(std::size_t k, std::size_t n) {
  if (k == 0) return 1.0;
  if (n % 2 == 0 && k == n / 2) return 1.0;
  return 2.0;
}

double parseval_energy(const Spectrum& spectrum) {
  double s = 0.0;
  for (std::size_t k = 0; k < spectrum.bins(); ++k)
    s += bin_weight(k, spectrum.n) * std::norm(spectrum.coefficients[k]);
  return s / static_cast<double>(spectrum.n);
}

std::vector<double> bin_magnitudes(const Spectrum& spectrum) {
  std::vector<double> out(spectrum.bins());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::abs(spectrum.coefficients[k]);
  return out;
}

TruncatedSpectrum truncate(const Spectrum& spectrum, const SparsificationSpec& spec) {
  if (spec.domain != Domain::kFrequency)
    throw InvalidArgument("truncate: spec must target the frequency domain");
  const auto magnitude = bin_magnitudes(spectrum);
  std::vector<double> weight(spectrum.bins());
  for (std::size_t k = 0; k < weight.size(); ++k) weight[k] = bin_weight(k, spectrum.n);

  TruncatedSpectrum out{spectrum, select_kept(magnitude, weight, spec)};
  for (std::size_t k = 0; k < out.mask.size(); ++k)
    if (!out.mask[k]) out.spectrum.coefficients[k] = Complex{};
  return out;
}

SparseSignal sparsify_time(std::span<const double> signal, const SparsificationSpec& spec) {
  if (spec.domain != Domain::kTime)
    throw InvalidArgument("sparsify_time: spec must target the time domain");
  std::vector<double> magnitude(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) magnitude[i] = std::abs(signal[i]);
  const std::vector<double> weight(signal.size(), 1.0);

  SparseSignal out{std::vector<double>(signal.begin(), signal.end()),
                   select_kept(magnitude, weight, spec)};
  for (std::size_t i = 0; i < out.mask.size(); ++i)
    if (!out.mask[i]) out.values[i] = 0.0;
  return out;
}

AssumptionCheck assumption_check(std::span<const double> v,
                                 std::span<const double> v_hat, double theta) {
  if (v.size() != v_hat.size())
    throw InvalidArgument("assumption_check: length mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) diff += (v[i] - v_hat[i]) * (v[i] - v_hat[i]);
  const double nv = norm2(v);
  const double nh = norm2(v_hat);

  AssumptionCheck r;
  r.error_ratio = nv == 0.0 ? 0.0 : std::sqrt(diff) / nv;
  r.norm_nonexpansive = nh <= nv * (1.0 + 1e-12);
  r.holds = r.error_ratio <= theta && r.norm_nonexpansive;
  return r;
}

uint16_t float_to_half(float x) {
  uint32_t bits = std::bit_cast<uint32_t>(x);
  const auto sign = static_cast<uint16_t>((bits >> 16) & 0x8000u);
  bits &= 0x7FFFFFFFu;

  if (bits >= 0x7F800000u)  // inf or NaN
    return sign | 0x7C00u | (bits > 0x7F800000u ? 0x0200u : 0u);
  if (bits >= 0x477FF000u)  // rounds past 65504
    return sign | 0x7C00u;
  if (bits < 0x38800000u) {
    // Subnormal result: let the FPU round by aligning against 0.5f.
    const float aligned = std::bit_cast<float>(bits) + 0.5f;
    return sign | static_cast<uint16_t>(std::bit_cast<uint32_t>(aligned) - 0x3F000000u);
  }
  const uint32_t odd = (bits >> 13) & 1u;
  bits += (static_cast<uint32_t>(15 - 127) << 23) + 0xFFFu;
  bits += odd;
  return sign | static_cast<uint16_t>(bits >> 13);
}

float half_to_float(uint16_t h) {
  const uint32_t sign = static_cast<uint32_t>(h & 0x8000u) << 16;
  const uint32_t exponent = (h >> 10) & 0x1Fu;
  const uint32_t mantissa = h & 0x3FFu;
  if (exponent == 0) {
    const float mag = std::ldexp(static_cast<float>(mantissa), -24);
    return sign ? -mag : mag;
  }
  if (exponent == 31) return std::bit_cast<float>(sign | 0x7F800000u | (mantissa << 13));
  return std::bit_cast<float>(sign | ((exponent + 112) << 23) | (mantissa << 13));
}

void half_round_trip(std::span<double> values) {
  for (double& v : values) v = half_to_float(float_to_half(static_cast<float>(v)));
}

}  // namespace fgc
