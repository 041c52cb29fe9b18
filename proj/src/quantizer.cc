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

#include "fgc/quantizer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "fgc/bitstream.h"
#include "fgc/error.h"

namespace fgc {
namespace {

constexpr uint32_t kMaxFiniteBits = 0x7F7FFFFFu;

uint32_t bits_of(float x) { return std::bit_cast<uint32_t>(x); }

// Magnitude of the q-th positive lattice point, q >= 1.
float magnitude(const QuantizerConfig& c, uint32_t q) {
  const uint64_t pattern = (uint64_t{q} + c.pbase - 1) << c.shift();
  if (pattern > kMaxFiniteBits) return std::numeric_limits<float>::max();
  return std::bit_cast<float>(static_cast<uint32_t>(pattern));
}

// Offset of |x| from pbase, 1-based. Requires |x| >= eps.
uint32_t offset_of(const QuantizerConfig& c, float magnitude) {
  return (bits_of(magnitude) >> c.shift()) - c.pbase + 1;
}

}  // namespace

QuantizerConfig make_quantizer(double min, double max, int n_bits,
                               int mantissa_bits, double eps) {
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(eps))
    throw InvalidArgument("quantizer: non-finite bound");
  if (!(min < 0.0 && max > 0.0))
    throw InvalidArgument("quantizer: range must satisfy min < 0 < max");
  if (n_bits < 2 || n_bits > 16)
    throw InvalidArgument("quantizer: n_bits must be in [2, 16]");
  if (mantissa_bits < 1 || mantissa_bits >= n_bits)
    throw InvalidArgument("quantizer: mantissa_bits must be in [1, n_bits)");
  if (!(eps > 0.0))
    throw InvalidArgument("quantizer: eps must be positive");

  QuantizerConfig c;
  c.min = static_cast<float>(min);
  c.max = static_cast<float>(max);
  c.n_bits = n_bits;
  c.mantissa_bits = mantissa_bits;

  const float e = static_cast<float>(eps);
  if (!(e > std::numeric_limits<float>::min()) || !(e < c.max))
    throw InvalidArgument("quantizer: eps must lie in (2^-126, max)");
  c.pbase = bits_of(e) >> c.shift();
  c.eps = std::bit_cast<float>(c.pbase << c.shift());

  const uint32_t p_raw = offset_of(c, c.max);
  c.pos_count = std::min(p_raw, c.code_count() - 2);
  return c;
}

float actual_min(const QuantizerConfig& config) {
  return decode(config, config.all_ones());
}

QuantizerConfig tune_eps(double min, double max, int n_bits, int mantissa_bits,
                         double eps_init) {
  if (!std::isfinite(eps_init) || eps_init <= 0.0)
    throw InvalidArgument("tune_eps: eps_init must be positive and finite");

  QuantizerConfig cfg = make_quantizer(min, max, n_bits, mantissa_bits, eps_init);
  QuantizerConfig best = cfg;
  double best_gap = std::abs(static_cast<double>(actual_min(cfg)) - min);
  std::optional<int> last_direction;

  for (int it = 0; it < kTuneMaxIterations; ++it) {
    const double am = actual_min(cfg);
    const double gap = std::abs(am - min);
    if (gap < best_gap) {
      best = cfg;
      best_gap = gap;
    }
    if (am == min) break;

    // actual_min below min: too many negative codes, shrink eps.
    const int direction = am < min ? -1 : +1;
    if (last_direction && *last_direction != direction) break;
    last_direction = direction;

    const double next = direction < 0 ? cfg.eps * 0.5 : cfg.eps * 2.0;
    if (!(next > std::numeric_limits<float>::min()) || !(next < cfg.max)) break;
    cfg = make_quantizer(min, max, n_bits, mantissa_bits, next);
  }
  return best;
}

uint32_t encode(const QuantizerConfig& c, float x) {
  if (std::isnan(x)) throw InvalidArgument("quantizer: NaN input");
  if (std::isinf(x)) throw InvalidArgument("quantizer: infinite input");

  const float a = std::abs(x);
  if (a < c.eps) return 0;
  if (x > 0.0f) {
    return std::min(offset_of(c, std::min(x, c.max)), c.pos_count);
  }
  const uint32_t q = std::min(offset_of(c, std::min(a, -c.min)), c.neg_count());
  return c.pos_count + q;
}

float decode(const QuantizerConfig& c, uint32_t code) {
  if (code >= c.code_count())
    throw InvalidArgument("quantizer: code " + std::to_string(code) +
                          " out of range for " + std::to_string(c.n_bits) +
                          "-bit config");
  if (code == 0) return 0.0f;
  if (code <= c.pos_count) return magnitude(c, code);
  return -magnitude(c, code - c.pos_count);
}

std::vector<uint8_t> encode_block(const QuantizerConfig& config,
                                  std::span<const float> values) {
  std::vector<uint8_t> out;
  out.reserve(bytes_for(values.size(), config.n_bits));
  BitWriter writer(out);
  for (std::size_t i = 0; i < values.size(); ++i) {
    uint32_t code;
    try {
      code = encode(config, values[i]);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("element " + std::to_string(i) + ": " + e.what());
    }
    writer.put(code, config.n_bits);
  }
  writer.flush();
  return out;
}

std::vector<float> decode_block(const QuantizerConfig& config,
                                std::span<const uint8_t> packed,
                                std::size_t count) {
  if (packed.size() < bytes_for(count, config.n_bits))
    throw InvalidArgument("decode_block: packed buffer too short");
  std::vector<float> out(count);
  BitReader reader(packed);
  for (std::size_t i = 0; i < count; ++i) {
    const uint32_t code = reader.get(config.n_bits);
    try {
      out[i] = decode(config, code);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("element " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fgc
