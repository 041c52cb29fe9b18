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

#ifndef FGC_BENCH_H_
#define FGC_BENCH_H_

#include <cstddef>

#include "fgc/costmodel.h"

namespace fgc {

// Wall-clock seconds per pass of each pipeline stage on this machine.
struct StageTimings {
  std::size_t elements = 0;
  double bytes = 0.0;      // float32 gradient size
  double precision = 0.0;  // binary16 round trip + quantization
  double transform = 0.0;  // forward DFT
  double packing = 0.0;    // status / prefix-sum / scatter
  double selection = 0.0;  // magnitude truncation
};

struct BenchResult {
  StageTimings timings;
  ThroughputProfile profile;  // GB/s derived from timings, t_comm as given
};

// Runs every stage serially `repeats` times on a random gradient of
// `elements` floats and keeps the fastest pass of each.
BenchResult measure_profile(std::size_t elements, std::size_t repeats, double t_comm,
                            unsigned seed = 1);

}  // namespace fgc

#endif  // FGC_BENCH_H_
