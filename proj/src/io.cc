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

#include "fgc/io.h"

#include <bit>
#include <fstream>
#include <iterator>

#include "fgc/error.h"

namespace fgc {

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to '" + path + "'");
}

std::vector<float> read_tensor(const std::string& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 8) throw DataError("'" + path + "' is missing the 8-byte length prefix");
  uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  if ((bytes.size() - 8) % 4 != 0 || (bytes.size() - 8) / 4 != count)
    throw DataError("'" + path + "' holds " + std::to_string((bytes.size() - 8) / 4) +
                    " floats but its prefix declares " + std::to_string(count));
  std::vector<float> values(count);
  for (uint64_t k = 0; k < count; ++k) {
    uint32_t w = 0;
    for (int i = 0; i < 4; ++i) w |= static_cast<uint32_t>(bytes[8 + 4 * k + i]) << (8 * i);
    values[k] = std::bit_cast<float>(w);
  }
  return values;
}

void write_tensor(const std::string& path, std::span<const float> values) {
  std::vector<uint8_t> bytes;
  bytes.reserve(8 + 4 * values.size());
  const uint64_t count = values.size();
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<uint8_t>(count >> (8 * i)));
  for (float v : values) {
    const auto w = std::bit_cast<uint32_t>(v);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(w >> (8 * i)));
  }
  write_bytes(path, bytes);
}

}  // namespace fgc
