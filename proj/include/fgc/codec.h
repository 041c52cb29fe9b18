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

#ifndef FGC_CODEC_H_
#define FGC_CODEC_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgc/packer.h"
#include "fgc/quantizer.h"
#include "fgc/spectral.h"

namespace fgc {

// Gradient compression pipeline:
//   [binary16 pass] -> DFT -> truncate -> quantize -> pack -> serialize
// and its inverse. Long vectors are split into chunks that are transformed
// independently.
//
// A chunk of n samples maps to exactly n real scalar slots of its half
// spectrum: re0, re1, im1, re2, im2, ..., and re(n/2) for even n. The
// imaginary parts of the DC and Nyquist bins are always zero and are not
// stored. Each slot is quantized separately and the occupancy bitmap covers
// the n slots.

inline constexpr int kPassthroughBits = 32;
inline constexpr std::size_t kDefaultChunkSize = std::size_t{1} << 16;
inline constexpr std::size_t kMinChunkSize = 16;

inline constexpr std::array<uint8_t, 4> kMagic = {'F', 'G', 'C', '1'};
inline constexpr uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 36;

enum : uint8_t {
  kFlagHalfPass = 1u << 0,
  kFlagEnergyMode = 1u << 1,
  kFlagPassthrough = 1u << 2,
};

// Quantizer stand-in that ships raw float32 bit patterns (N = 32), so
// sparsification can be evaluated without quantization error.
QuantizerConfig passthrough_quantizer();

struct CodecConfig {
  SparsificationSpec sparsification;
  QuantizerConfig quantizer = passthrough_quantizer();
  bool half_precision_pass = false;
  std::size_t chunk_size = kDefaultChunkSize;

  bool passthrough() const { return quantizer.n_bits == kPassthroughBits; }
};

// Throws InvalidArgument on chunk_size < 16, theta outside [0, 1], or a
// sparsification spec that does not target the frequency domain.
void validate(const CodecConfig& config);

struct MessageHeader {
  uint8_t version = kWireVersion;
  uint8_t flags = 0;
  uint64_t original_len = 0;
  uint32_t chunk_size = 0;
  float theta = 0.0f;
  float min = 0.0f;
  float max = 0.0f;
  float eps = 0.0f;
  uint8_t n_bits = 0;
  uint8_t mantissa_bits = 0;

  friend bool operator==(const MessageHeader&, const MessageHeader&) = default;
};

struct ChunkPayload {
  uint32_t kept = 0;           // number of non-zero codes
  Bitmap bitmap;               // one bit per scalar slot
  std::vector<uint8_t> codes;  // kept codes, N bits each

  friend bool operator==(const ChunkPayload&, const ChunkPayload&) = default;
};

struct CompressedMessage {
  MessageHeader header;
  std::vector<ChunkPayload> chunks;

  std::size_t chunk_count() const;
  std::size_t chunk_length(std::size_t index) const;
  std::size_t byte_size() const;

  friend bool operator==(const CompressedMessage&, const CompressedMessage&) = default;
};

std::vector<uint8_t> serialize(const CompressedMessage& message);

// Throws CorruptHeaderError, TruncatedPayloadError or BitmapMismatchError
// (all FormatError) on malformed input.
CompressedMessage deserialize(std::span<const uint8_t> bytes);

// Rebuilds the quantizer described by a header. Passthrough headers yield
// passthrough_quantizer().
QuantizerConfig quantizer_from_header(const MessageHeader& header);

// Symmetric range [-r, r] with r the largest |re| or |im| over the truncated
// spectra of the samples, then eps tuning. Rejects empty or all-zero samples.
QuantizerConfig calibrate(std::span<const std::vector<double>> samples, int n_bits,
                          int mantissa_bits, const SparsificationSpec& spec = {},
                          std::size_t chunk_size = kDefaultChunkSize);

CompressedMessage compress(std::span<const double> gradient, const CodecConfig& config);

std::vector<double> decompress(const CompressedMessage& message);

// Analytic raw-float32 to message size ratio. Without bitmap and headers this
// is 32 / (N (1 - theta)), i.e. 4 / (1 - theta) for N = 8.
double compression_ratio(const CodecConfig& config, std::size_t n, bool include_bitmap);

}  // namespace fgc

#endif  // FGC_CODEC_H_
