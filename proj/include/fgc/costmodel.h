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

#ifndef FGC_COSTMODEL_H_
#define FGC_COSTMODEL_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fgc {

// Stage throughputs in GB/s.
struct ThroughputProfile {
  double t_m = 1.0;     // precision change + thresholding
  double t_f = 1.0;     // transform
  double t_p = 1.0;     // packing
  double t_s = 1.0;     // top-k selection
  double t_comm = 1.0;  // network

  friend bool operator==(const ThroughputProfile&, const ThroughputProfile&) = default;
};

// Compression runs once at the sender and once (inverted) at the receiver.
inline constexpr double kCostMultiplier = 2.0;

void validate(const ThroughputProfile& p);

// Seconds to push `bytes` through the pipeline:
// M * (4/T_m + 1/T_f + 1/T_p + 1/T_s), with M in GB.
double compression_cost(double bytes, const ThroughputProfile& p);

// Seconds of network time saved by sending 1/k of the message.
double saved_comm_cost(double bytes, double k, const ThroughputProfile& p);

// Smallest ratio k for which compressing pays off, or nullopt when the
// pipeline is too slow for the network at any k.
std::optional<double> min_beneficial_k(const ThroughputProfile& p,
                                       double multiplier = kCostMultiplier);

bool is_beneficial(double bytes, double k, const ThroughputProfile& p,
                   double multiplier = kCostMultiplier);

struct SweepRow {
  double t_comm = 0.0;
  std::optional<double> min_k;
};

// `count` evenly spaced t_comm values over [lo, hi], endpoints included.
std::vector<SweepRow> sweep(const ThroughputProfile& base, double lo, double hi,
                            std::size_t count);

// Parses "tcomm=LO:HI:COUNT" (the "tcomm=" prefix is optional).
struct SweepRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};
SweepRange parse_sweep_range(const std::string& text);

// CSV with header "t_comm,min_k"; infeasible rows carry "inf".
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

}  // namespace fgc

#endif  // FGC_COSTMODEL_H_
