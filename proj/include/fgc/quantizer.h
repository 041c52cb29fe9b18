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

#ifndef FGC_QUANTIZER_H_
#define FGC_QUANTIZER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fgc {

// Offset-based N-bit minifloat.
//
// A code is an offset from `pbase`, the single-precision bit pattern of the
// smallest representable magnitude `eps` shifted right by (23 - m). Keeping m
// mantissa bits means the spacing between neighbouring codes doubles every
// 2^m codes, so representable values are densest around zero.
//
// Code layout for N bits:
//   0               -> 0.0
//   1 .. P          -> +eps ... +max (ascending)
//   P+1 .. 2^N-1    -> -eps ... most negative (all-ones is the minimum)
struct QuantizerConfig {
  float min = -1.0f;
  float max = 1.0f;
  int n_bits = 8;
  int mantissa_bits = 3;
  float eps = 0.0f;        // snapped to its lattice value
  uint32_t pbase = 0;      // bits(eps) >> (23 - m)
  uint32_t pos_count = 0;  // P

  int shift() const { return 23 - mantissa_bits; }
  uint32_t code_count() const { return uint32_t{1} << n_bits; }
  uint32_t neg_count() const { return code_count() - 1 - pos_count; }
  uint32_t all_ones() const { return code_count() - 1; }

  friend bool operator==(const QuantizerConfig&, const QuantizerConfig&) = default;
};

inline constexpr int kDefaultBits = 8;
inline constexpr int kDefaultMantissa = 3;
inline constexpr float kDefaultEpsInit = 0.002f;
inline constexpr int kTuneMaxIterations = 64;

// Builds a config for a fixed eps without tuning. Throws InvalidArgument when
// min < 0 < max, 1 <= m < N <= 16, or 2^-126 < eps < max do not hold.
QuantizerConfig make_quantizer(double min, double max, int n_bits,
                               int mantissa_bits, double eps);

// Halves or doubles eps until the decoded all-ones code (the most negative
// representable value) brackets `min`, then keeps the candidate closest to it.
QuantizerConfig tune_eps(double min, double max, int n_bits, int mantissa_bits,
                         double eps_init = kDefaultEpsInit);

// Most negative representable value, i.e. decode(all-ones).
float actual_min(const QuantizerConfig& config);

// Truncating encode (no rounding): |x| < eps flushes to 0, out-of-range values
// clamp to max/min. NaN and infinities throw InvalidArgument.
uint32_t encode(const QuantizerConfig& config, float x);

float decode(const QuantizerConfig& config, uint32_t code);

// Element-wise encode, N bits per code, little-endian within bytes.
std::vector<uint8_t> encode_block(const QuantizerConfig& config,
                                  std::span<const float> values);

std::vector<float> decode_block(const QuantizerConfig& config,
                                std::span<const uint8_t> packed,
                                std::size_t count);

}  // namespace fgc

#endif  // FGC_QUANTIZER_H_
