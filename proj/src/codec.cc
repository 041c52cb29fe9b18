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

#include "fgc/codec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fgc/bitstream.h"
#include "fgc/error.h"

namespace fgc {
namespace {

// --- little-endian byte helpers -------------------------------------------

class ByteSink {
 public:
  explicit ByteSink(std::vector<uint8_t>& out) : out_(out) {}

  void u8(uint8_t v) { out_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

 private:
  std::vector<uint8_t>& out_;
};

class ByteSource {
 public:
  explicit ByteSource(std::span<const uint8_t> in) : in_(in) {}

  std::size_t remaining() const { return in_.size() - pos_; }

  uint8_t u8() { return in_[pos_++]; }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<uint8_t> bytes(std::size_t n) {
    std::vector<uint8_t> v(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                           in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return v;
  }

 private:
  std::span<const uint8_t> in_;
  std::size_t pos_ = 0;
};

// --- scalar slot layout ---------------------------------------------------

std::vector<double> spectrum_to_slots(const Spectrum& s) {
  std::vector<double> slots;
  slots.reserve(s.n);
  slots.push_back(s.coefficients[0].real());
  for (std::size_t k = 1; k < s.bins(); ++k) {
    slots.push_back(s.coefficients[k].real());
    if (!(s.n % 2 == 0 && k == s.n / 2)) slots.push_back(s.coefficients[k].imag());
  }
  return slots;
}

Spectrum slots_to_spectrum(std::span<const double> slots) {
  Spectrum s;
  s.n = slots.size();
  s.coefficients.resize(s.n / 2 + 1);
  std::size_t i = 0;
  s.coefficients[0] = Complex{slots[i++], 0.0};
  for (std::size_t k = 1; k < s.bins(); ++k) {
    if (s.n % 2 == 0 && k == s.n / 2) {
      s.coefficients[k] = Complex{slots[i++], 0.0};
    } else {
      const double re = slots[i++];
      const double im = slots[i++];
      s.coefficients[k] = Complex{re, im};
    }
  }
  return s;
}

uint32_t encode_slot(const QuantizerConfig& q, double value) {
  const auto f = static_cast<float>(value);
  if (q.n_bits == kPassthroughBits) return f == 0.0f ? 0u : std::bit_cast<uint32_t>(f);
  return encode(q, f);
}

double decode_slot(const QuantizerConfig& q, uint32_t code) {
  if (q.n_bits == kPassthroughBits) return std::bit_cast<float>(code);
  return decode(q, code);
}

MessageHeader make_header(const CodecConfig& config, std::size_t original_len) {
  MessageHeader h;
  h.flags = static_cast<uint8_t>(
      (config.half_precision_pass ? kFlagHalfPass : 0) |
      (config.sparsification.mode == DropMode::kEnergy ? kFlagEnergyMode : 0) |
      (config.passthrough() ? kFlagPassthrough : 0));
  h.original_len = original_len;
  h.chunk_size = static_cast<uint32_t>(config.chunk_size);
  h.theta = static_cast<float>(config.sparsification.theta);
  h.min = config.quantizer.min;
  h.max = config.quantizer.max;
  h.eps = config.quantizer.eps;
  h.n_bits = static_cast<uint8_t>(config.quantizer.n_bits);
  h.mantissa_bits = static_cast<uint8_t>(config.quantizer.mantissa_bits);
  return h;
}

ChunkPayload compress_chunk(std::span<const double> chunk, const CodecConfig& config) {
  std::vector<double> signal(chunk.begin(), chunk.end());
  if (config.half_precision_pass) half_round_trip(signal);

  const auto truncated = truncate(dft_forward(signal), config.sparsification);
  const auto slots = spectrum_to_slots(truncated.spectrum);

  std::vector<uint32_t> codes(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) codes[i] = encode_slot(config.quantizer, slots[i]);

  auto packed = pack<uint32_t>(codes);
  ChunkPayload out;
  out.kept = static_cast<uint32_t>(packed.dense.size());
  out.bitmap = std::move(packed.bitmap);
  BitWriter writer(out.codes);
  for (uint32_t c : packed.dense) writer.put(c, config.quantizer.n_bits);
  writer.flush();
  return out;
}

std::vector<double> decompress_chunk(const ChunkPayload& chunk, std::size_t length,
                                     const QuantizerConfig& q) {
  if (chunk.bitmap.size() != length)
    throw BitmapMismatchError("chunk bitmap covers " + std::to_string(chunk.bitmap.size()) +
                              " slots, expected " + std::to_string(length));
  if (chunk.codes.size() < bytes_for(chunk.kept, q.n_bits))
    throw TruncatedPayloadError("chunk code block shorter than kept-count requires");

  PackedSparse<uint32_t> packed{chunk.bitmap, std::vector<uint32_t>(chunk.kept)};
  BitReader reader(chunk.codes);
  for (auto& c : packed.dense) {
    c = reader.get(q.n_bits);
    if (c == 0) throw BitmapMismatchError("occupied slot carries the zero code");
  }
  const auto codes = unpack(packed);

  std::vector<double> slots(length);
  for (std::size_t i = 0; i < length; ++i) slots[i] = decode_slot(q, codes[i]);
  return dft_inverse(slots_to_spectrum(slots));
}

}  // namespace

QuantizerConfig passthrough_quantizer() {
  QuantizerConfig q;
  q.min = 0.0f;
  q.max = 0.0f;
  q.eps = 0.0f;
  q.n_bits = kPassthroughBits;
  q.mantissa_bits = 23;
  q.pbase = 0;
  q.pos_count = 0;
  return q;
}

void validate(const CodecConfig& config) {
  if (config.chunk_size < kMinChunkSize)
    throw InvalidArgument("codec: chunk_size must be at least 16");
  if (config.chunk_size > UINT32_MAX) throw InvalidArgument("codec: chunk_size too large");
  const double theta = config.sparsification.theta;
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("codec: theta must lie in [0, 1]");
  if (config.sparsification.domain != Domain::kFrequency)
    throw InvalidArgument("codec: sparsification must target the frequency domain");
  if (!config.passthrough()) {
    const auto& q = config.quantizer;
    // Re-deriving catches hand-edited configs whose pbase/P disagree.
    if (make_quantizer(q.min, q.max, q.n_bits, q.mantissa_bits, q.eps) != q)
      throw InvalidArgument("codec: inconsistent quantizer config");
  }
}

std::size_t CompressedMessage::chunk_count() const {
  if (header.original_len == 0 || header.chunk_size == 0) return 0;
  return static_cast<std::size_t>((header.original_len + header.chunk_size - 1) / header.chunk_size);
}

std::size_t CompressedMessage::chunk_length(std::size_t index) const {
  const uint64_t start = static_cast<uint64_t>(index) * header.chunk_size;
  return static_cast<std::size_t>(std::min<uint64_t>(header.chunk_size, header.original_len - start));
}

std::size_t CompressedMessage::byte_size() const {
  std::size_t total = kHeaderBytes;
  for (const auto& c : chunks) total += 4 + c.bitmap.bytes().size() + c.codes.size();
  return total;
}

std::vector<uint8_t> serialize(const CompressedMessage& message) {
  std::vector<uint8_t> out;
  out.reserve(message.byte_size());
  ByteSink sink(out);
  const auto& h = message.header;
  sink.bytes(kMagic);
  sink.u8(h.version);
  sink.u8(h.flags);
  sink.u64(h.original_len);
  sink.u32(h.chunk_size);
  sink.f32(h.theta);
  sink.f32(h.min);
  sink.f32(h.max);
  sink.f32(h.eps);
  sink.u8(h.n_bits);
  sink.u8(h.mantissa_bits);
  for (const auto& c : message.chunks) {
    sink.u32(c.kept);
    sink.bytes(c.bitmap.bytes());
    sink.bytes(c.codes);
  }
  return out;
}

QuantizerConfig quantizer_from_header(const MessageHeader& h) {
  if (h.n_bits == kPassthroughBits) return passthrough_quantizer();
  return make_quantizer(h.min, h.max, h.n_bits, h.mantissa_bits, h.eps);
}

CompressedMessage deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes)
    throw CorruptHeaderError("message shorter than the " + std::to_string(kHeaderBytes) +
                             "-byte header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw CorruptHeaderError("bad magic, expected \"FGC1\"");

  ByteSource src(bytes.subspan(kMagic.size()));
  CompressedMessage m;
  auto& h = m.header;
  h.version = src.u8();
  h.flags = src.u8();
  h.original_len = src.u64();
  h.chunk_size = src.u32();
  h.theta = src.f32();
  h.min = src.f32();
  h.max = src.f32();
  h.eps = src.f32();
  h.n_bits = src.u8();
  h.mantissa_bits = src.u8();

  if (h.version != kWireVersion)
    throw CorruptHeaderError("unsupported version " + std::to_string(h.version));
  if (h.flags & ~(kFlagHalfPass | kFlagEnergyMode | kFlagPassthrough))
    throw CorruptHeaderError("unknown flag bits set");
  if (h.chunk_size < kMinChunkSize) throw CorruptHeaderError("chunk_size below minimum");
  if (!(h.theta >= 0.0f && h.theta <= 1.0f)) throw CorruptHeaderError("theta outside [0, 1]");
  const bool passthrough_flag = (h.flags & kFlagPassthrough) != 0;
  if (passthrough_flag != (h.n_bits == kPassthroughBits))
    throw CorruptHeaderError("passthrough flag disagrees with code width");
  try {
    (void)quantizer_from_header(h);
  } catch (const InvalidArgument& e) {
    throw CorruptHeaderError(std::string("invalid quantizer parameters: ") + e.what());
  }

  const int width = h.n_bits;
  const std::size_t chunks = m.chunk_count();
  for (std::size_t i = 0; i < chunks; ++i) {
    const std::size_t len = m.chunk_length(i);
    const std::size_t bitmap_bytes = (len + 7) / 8;
    if (src.remaining() < 4 + bitmap_bytes)
      throw TruncatedPayloadError("payload ends inside chunk " + std::to_string(i));
    ChunkPayload c;
    c.kept = src.u32();
    if (c.kept > len)
      throw BitmapMismatchError("chunk " + std::to_string(i) + " kept-count exceeds its length");
    c.bitmap = Bitmap(len, src.bytes(bitmap_bytes));
    if (c.bitmap.popcount() != c.kept || !c.bitmap.padding_clear())
      throw BitmapMismatchError("chunk " + std::to_string(i) +
                                " bitmap population disagrees with kept-count");
    const std::size_t code_bytes = bytes_for(c.kept, width);
    if (src.remaining() < code_bytes)
      throw TruncatedPayloadError("payload ends inside chunk " + std::to_string(i) + " codes");
    c.codes = src.bytes(code_bytes);
    m.chunks.push_back(std::move(c));
  }
  if (src.remaining() != 0)
    throw FormatError(std::to_string(src.remaining()) + " trailing bytes after last chunk");
  return m;
}

QuantizerConfig calibrate(std::span<const std::vector<double>> samples, int n_bits,
                          int mantissa_bits, const SparsificationSpec& spec,
                          std::size_t chunk_size) {
  if (samples.empty()) throw InvalidArgument("calibrate: need at least one sample");
  if (chunk_size < kMinChunkSize) throw InvalidArgument("calibrate: chunk_size below minimum");
  SparsificationSpec freq = spec;
  freq.domain = Domain::kFrequency;

  double r = 0.0;
  for (const auto& sample : samples) {
    for (std::size_t lo = 0; lo < sample.size(); lo += chunk_size) {
      const std::size_t len = std::min(chunk_size, sample.size() - lo);
      const auto t = truncate(dft_forward(std::span(sample).subspan(lo, len)), freq);
      for (const auto& c : t.spectrum.coefficients)
        r = std::max({r, std::abs(c.real()), std::abs(c.imag())});
    }
  }
  if (!(r > 0.0)) throw InvalidArgument("calibrate: samples are all zero");
  return tune_eps(-r, r, n_bits, mantissa_bits, kDefaultEpsInit * r);
}

CompressedMessage compress(std::span<const double> gradient, const CodecConfig& config) {
  validate(config);
  for (std::size_t i = 0; i < gradient.size(); ++i)
    if (!std::isfinite(gradient[i]))
      throw DataError("compress: non-finite gradient value at index " + std::to_string(i));

  CompressedMessage m;
  m.header = make_header(config, gradient.size());
  const std::size_t chunks = m.chunk_count();
  m.chunks.reserve(chunks);
  for (std::size_t i = 0; i < chunks; ++i)
    m.chunks.push_back(
        compress_chunk(gradient.subspan(i * config.chunk_size, m.chunk_length(i)), config));
  return m;
}

std::vector<double> decompress(const CompressedMessage& message) {
  const auto& h = message.header;
  if (h.chunk_size < kMinChunkSize) throw CorruptHeaderError("chunk_size below minimum");
  QuantizerConfig q;
  try {
    q = quantizer_from_header(h);
  } catch (const InvalidArgument& e) {
    throw CorruptHeaderError(std::string("invalid quantizer parameters: ") + e.what());
  }
  const std::size_t chunks = message.chunk_count();
  if (message.chunks.size() != chunks)
    throw TruncatedPayloadError("message holds " + std::to_string(message.chunks.size()) +
                                " chunks, header requires " + std::to_string(chunks));

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(h.original_len));
  for (std::size_t i = 0; i < chunks; ++i) {
    const auto part = decompress_chunk(message.chunks[i], message.chunk_length(i), q);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

double compression_ratio(const CodecConfig& config, std::size_t n, bool include_bitmap) {
  if (n == 0) throw InvalidArgument("compression_ratio: n must be at least 1");
  const double theta = config.sparsification.theta;
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("compression_ratio: theta outside [0, 1]");
  const double bits = config.quantizer.n_bits;
  const double keep = 1.0 - theta;
  if (!include_bitmap) {
    if (keep <= 0.0) throw InvalidArgument("compression_ratio: unbounded at theta = 1");
    return 32.0 / (bits * keep);
  }
  const double len = static_cast<double>(n);
  const std::size_t chunk = std::max(config.chunk_size, kMinChunkSize);
  const double chunks = static_cast<double>((n + chunk - 1) / chunk);
  const double header_bits = 8.0 * (static_cast<double>(kHeaderBytes) + 4.0 * chunks);
  return 32.0 * len / (bits * keep * len + len + header_bits);
}

}  // namespace fgc
