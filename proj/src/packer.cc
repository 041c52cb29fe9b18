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

#include "fgc/packer.h"

#include <algorithm>
#include <bit>

namespace fgc {
namespace {

constexpr std::size_t kScanBlock = 4096;

}  // namespace

std::size_t Bitmap::popcount() const {
  std::size_t total = 0;
  for (uint8_t b : bytes_) total += static_cast<std::size_t>(std::popcount(b));
  return total;
}

bool Bitmap::padding_clear() const {
  const std::size_t tail = size_ % 8;
  if (tail == 0) return true;
  const auto pad_mask = static_cast<uint8_t>(0xFFu >> tail);
  return (bytes_.back() & pad_mask) == 0;
}

// Blocked two-pass scan: per-block totals, exclusive scan over the totals,
// then a local scan per block seeded with its offset. Blocks are independent
// in the first and last pass.
std::vector<uint32_t> prefix_sum(std::span<const uint8_t> status) {
  const std::size_t n = status.size();
  std::vector<uint32_t> out(n);
  if (n == 0) return out;

  const std::size_t blocks = (n + kScanBlock - 1) / kScanBlock;
  std::vector<uint32_t> offset(blocks, 0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * kScanBlock;
    const std::size_t hi = std::min(n, lo + kScanBlock);
    uint32_t s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += status[i];
    offset[b] = s;
  }
  uint32_t running = 0;
  for (auto& o : offset) {
    const uint32_t t = o;
    o = running;
    running += t;
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * kScanBlock;
    const std::size_t hi = std::min(n, lo + kScanBlock);
    uint32_t s = offset[b];
    for (std::size_t i = lo; i < hi; ++i) {
      s += status[i];
      out[i] = s;
    }
  }
  return out;
}

}  // namespace fgc
