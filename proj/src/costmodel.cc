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

#include "fgc/costmodel.h"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "fgc/error.h"

namespace fgc {
namespace {

constexpr double kBytesPerGB = 1e9;

double per_byte_cost(const ThroughputProfile& p) {
  return 4.0 / p.t_m + 1.0 / p.t_f + 1.0 / p.t_p + 1.0 / p.t_s;
}

}  // namespace

void validate(const ThroughputProfile& p) {
  for (double t : {p.t_m, p.t_f, p.t_p, p.t_s, p.t_comm})
    if (!std::isfinite(t) || t <= 0.0)
      throw InvalidArgument("throughputs must be positive and finite");
}

double compression_cost(double bytes, const ThroughputProfile& p) {
  validate(p);
  if (!(bytes >= 0.0)) throw InvalidArgument("message size must be non-negative");
  return bytes / kBytesPerGB * per_byte_cost(p);
}

double saved_comm_cost(double bytes, double k, const ThroughputProfile& p) {
  validate(p);
  return bytes / kBytesPerGB / p.t_comm * (1.0 - 1.0 / k);
}

std::optional<double> min_beneficial_k(const ThroughputProfile& p, double multiplier) {
  validate(p);
  const double denom = 1.0 - multiplier * p.t_comm * per_byte_cost(p);
  if (denom <= 0.0) return std::nullopt;
  return 1.0 / denom;
}

bool is_beneficial(double bytes, double k, const ThroughputProfile& p, double multiplier) {
  if (!(k >= 1.0)) throw InvalidArgument("compression ratio must be at least 1");
  return multiplier * compression_cost(bytes, p) < saved_comm_cost(bytes, k, p);
}

std::vector<SweepRow> sweep(const ThroughputProfile& base, double lo, double hi,
                            std::size_t count) {
  if (count == 0) throw InvalidArgument("sweep: count must be positive");
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("sweep: need 0 < lo <= hi");
  std::vector<SweepRow> rows(count);
  for (std::size_t i = 0; i < count; ++i) {
    ThroughputProfile p = base;
    p.t_comm = count == 1 ? lo
                          : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    rows[i] = {p.t_comm, min_beneficial_k(p)};
  }
  return rows;
}

SweepRange parse_sweep_range(const std::string& text) {
  std::string body = text;
  if (const auto eq = body.find('='); eq != std::string::npos) {
    if (body.substr(0, eq) != "tcomm")
      throw InvalidArgument("sweep: only tcomm can be swept, got '" + body.substr(0, eq) + "'");
    body = body.substr(eq + 1);
  }
  std::istringstream in(body);
  SweepRange r;
  char c1 = 0, c2 = 0;
  long long count = 0;
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> count) || c1 != ':' || c2 != ':' || count <= 0 ||
      !(in >> std::ws).eof())
    throw InvalidArgument("sweep: expected tcomm=LO:HI:COUNT, got '" + text + "'");
  r.count = static_cast<std::size_t>(count);
  return r;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "t_comm,min_k\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.t_comm << ',';
    if (r.min_k) {
      os << *r.min_k;
    } else {
      os << "inf";
    }
    os << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t_comm,min_k")
    throw DataError("sweep csv: missing header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("sweep csv: malformed row '" + line + "'");
    SweepRow r;
    r.t_comm = std::stod(line.substr(0, comma));
    const std::string k = line.substr(comma + 1);
    if (k != "inf") r.min_k = std::stod(k);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fgc
