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

#ifndef FGC_IO_H_
#define FGC_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fgc {

// Raw tensor files: u64 little-endian element count, then that many
// little-endian float32 values. Errors throw DataError.
std::vector<float> read_tensor(const std::string& path);
void write_tensor(const std::string& path, std::span<const float> values);

std::vector<uint8_t> read_bytes(const std::string& path);
void write_bytes(const std::string& path, std::span<const uint8_t> bytes);

}  // namespace fgc

#endif  // FGC_IO_H_
