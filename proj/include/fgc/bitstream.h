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

#ifndef FGC_BITSTREAM_H_
#define FGC_BITSTREAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fgc {

// Fixed-width code packing. Codes are written least-significant bit first,
// filling each byte from bit 0 upward (little-endian within bytes).
class BitWriter {
 public:
  explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}
  ~BitWriter() { flush(); }

  BitWriter(const BitWriter&) = delete;
  BitWriter& operator=(const BitWriter&) = delete;

  void put(uint32_t value, int width) {
    acc_ |= static_cast<uint64_t>(value & mask(width)) << fill_;
    fill_ += width;
    while (fill_ >= 8) {
      out_.push_back(static_cast<uint8_t>(acc_ & 0xFFu));
      acc_ >>= 8;
      fill_ -= 8;
    }
  }

  void flush() {
    if (fill_ > 0) {
      out_.push_back(static_cast<uint8_t>(acc_ & 0xFFu));
      acc_ = 0;
      fill_ = 0;
    }
  }

 private:
  static uint64_t mask(int width) { return (uint64_t{1} << width) - 1; }

  std::vector<uint8_t>& out_;
  uint64_t acc_ = 0;
  int fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> in) : in_(in) {}

  // Caller guarantees enough bytes remain; see bytes_for().
  uint32_t get(int width) {
    while (fill_ < width) {
      acc_ |= static_cast<uint64_t>(in_[pos_++]) << fill_;
      fill_ += 8;
    }
    const auto v = static_cast<uint32_t>(acc_ & ((uint64_t{1} << width) - 1));
    acc_ >>= width;
    fill_ -= width;
    return v;
  }

 private:
  std::span<const uint8_t> in_;
  std::size_t pos_ = 0;
  uint64_t acc_ = 0;
  int fill_ = 0;
};

inline std::size_t bytes_for(std::size_t count, int width) {
  return (count * static_cast<std::size_t>(width) + 7) / 8;
}

}  // namespace fgc

#endif  // FGC_BITSTREAM_H_
