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

#ifndef FGC_PACKER_H_
#define FGC_PACKER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fgc/error.h"

namespace fgc {

// Occupancy bitmap, one bit per element, MSB-first within each byte: byte i
// covers elements [8i, 8i + 8).
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t size) : size_(size), bytes_((size + 7) / 8, 0) {}
  Bitmap(std::size_t size, std::vector<uint8_t> bytes)
      : size_(size), bytes_(std::move(bytes)) {
    if (bytes_.size() != (size_ + 7) / 8)
      throw InvalidArgument("bitmap: byte count does not match element count");
  }

  std::size_t size() const { return size_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

  bool test(std::size_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1u; }
  void set(std::size_t i) { bytes_[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8)); }

  std::size_t popcount() const;
  // True when padding bits past size() are all zero.
  bool padding_clear() const;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<uint8_t> bytes_;
};

template <typename T>
struct PackedSparse {
  Bitmap bitmap;
  std::vector<T> dense;

  std::size_t original_len() const { return bitmap.size(); }
  friend bool operator==(const PackedSparse&, const PackedSparse&) = default;
};

// Inclusive prefix sum of a 0/1 status vector.
std::vector<uint32_t> prefix_sum(std::span<const uint8_t> status);

template <typename T>
PackedSparse<T> pack(std::span<const T> sparse) {
  const std::size_t n = sparse.size();
  std::vector<uint8_t> status(n);
  for (std::size_t i = 0; i < n; ++i) status[i] = sparse[i] != T{} ? 1 : 0;
  const auto location = prefix_sum(status);

  PackedSparse<T> out{Bitmap(n), std::vector<T>(n == 0 ? 0 : location.back())};
  for (std::size_t i = 0; i < n; ++i) {
    if (status[i]) {
      out.bitmap.set(i);
      out.dense[location[i] - 1] = sparse[i];
    }
  }
  return out;
}

template <typename T>
std::vector<T> unpack(const PackedSparse<T>& packed) {
  const std::size_t kept = packed.bitmap.popcount();
  if (kept != packed.dense.size())
    throw BitmapMismatchError("unpack: bitmap marks " + std::to_string(kept) +
                              " elements but " + std::to_string(packed.dense.size()) +
                              " values are present");
  std::vector<T> out(packed.original_len(), T{});
  std::size_t next = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (packed.bitmap.test(i)) out[i] = packed.dense[next++];
  return out;
}

}  // namespace fgc

#endif  // FGC_PACKER_H_
