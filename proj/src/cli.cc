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

#include "fgc/cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "fgc/bench.h"
#include "fgc/codec.h"
#include "fgc/costmodel.h"
#include "fgc/error.h"
#include "fgc/io.h"
#include "fgc/quantizer.h"
#include "fgc/simulator.h"
#include "fgc/spectral.h"

namespace fgc::cli {
namespace {

using Json = nlohmann::ordered_json;

// Numeric failure that maps to exit code 3.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json null_if_infinite(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<uint64_t> seed_override() {
  if (const char* s = std::getenv("FGC_SEED"); s && *s) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("FGC_SEED is not an unsigned integer: ") + s);
    }
  }
  return std::nullopt;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  return f;
}

// Writes CSV either to --out or, without one, to stdout (moving the JSON
// summary to stderr so stdout stays parseable).
struct CsvSink {
  std::ostream* stdout_stream;
  std::ostream* summary;
  std::ofstream file;

  std::ostream& csv() { return file.is_open() ? file : *stdout_stream; }
};

CsvSink csv_sink(const std::string& path, std::ostream& out, std::ostream& err) {
  if (path.empty()) return CsvSink{&out, &err, {}};
  return CsvSink{&out, &out, open_out(path)};
}

Json quantizer_json(const QuantizerConfig& q) {
  return Json{{"min", q.min},   {"max", q.max},
              {"eps", q.eps},   {"n_bits", q.n_bits},
              {"mantissa_bits", q.mantissa_bits},
              {"pos_count", q.pos_count}};
}

Json header_json(const MessageHeader& h) {
  return Json{{"version", h.version},
              {"flags", h.flags},
              {"original_len", h.original_len},
              {"chunk_size", h.chunk_size},
              {"theta", h.theta},
              {"min", h.min},
              {"max", h.max},
              {"eps", h.eps},
              {"n_bits", h.n_bits},
              {"mantissa_bits", h.mantissa_bits}};
}

ThroughputProfile profile_from_json(const Json& j) {
  ThroughputProfile p;
  try {
    p.t_m = j.at("t_m").get<double>();
    p.t_f = j.at("t_f").get<double>();
    p.t_p = j.at("t_p").get<double>();
    p.t_s = j.at("t_s").get<double>();
    p.t_comm = j.at("t_comm").get<double>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("profile: ") + e.what());
  }
  return p;
}

Json profile_json(const ThroughputProfile& p) {
  return Json{{"t_m", p.t_m}, {"t_f", p.t_f}, {"t_p", p.t_p}, {"t_s", p.t_s}, {"t_comm", p.t_comm}};
}

// --- subcommands ------------------------------------------------------------

struct CompressArgs {
  std::string in, out;
  double theta = 0.7;
  int nbits = kDefaultBits;
  int mantissa = kDefaultMantissa;
  std::string mode = "count";
  std::size_t chunk = kDefaultChunkSize;
  bool half = false;
  double range = 0.0;
};

int run_compress(const CompressArgs& a, std::ostream& out) {
  const auto floats = read_tensor(a.in);
  const std::vector<double> gradient(floats.begin(), floats.end());

  CodecConfig config;
  config.sparsification = {a.theta, parse_drop_mode(a.mode), Domain::kFrequency};
  config.half_precision_pass = a.half;
  config.chunk_size = a.chunk;
  validate(config);
  if (a.nbits != kPassthroughBits) {
    if (a.range > 0.0) {
      config.quantizer = tune_eps(-a.range, a.range, a.nbits, a.mantissa, kDefaultEpsInit * a.range);
    } else if (std::any_of(gradient.begin(), gradient.end(), [](double v) { return v != 0.0; })) {
      const std::vector<std::vector<double>> samples{gradient};
      config.quantizer = calibrate(samples, a.nbits, a.mantissa, config.sparsification, a.chunk);
    } else {
      config.quantizer = tune_eps(-1.0, 1.0, a.nbits, a.mantissa);
    }
  }

  const auto message = compress(gradient, config);
  const auto bytes = serialize(message);
  write_bytes(a.out, bytes);

  const double raw = 4.0 * static_cast<double>(gradient.size());
  out << Json{{"command", "compress"},
              {"original_len", gradient.size()},
              {"chunks", message.chunks.size()},
              {"bytes", bytes.size()},
              {"raw_bytes", raw},
              {"ratio", bytes.empty() ? 0.0 : raw / static_cast<double>(bytes.size())},
              {"theta", a.theta},
              {"mode", a.mode},
              {"quantizer", quantizer_json(config.quantizer)},
              {"out", a.out}}
             .dump()
      << '\n';
  return kOk;
}

int run_decompress(const std::string& in, const std::string& out_path, std::ostream& out) {
  const auto bytes = read_bytes(in);
  const auto message = deserialize(bytes);
  const auto values = decompress(message);
  const std::vector<float> floats(values.begin(), values.end());
  write_tensor(out_path, floats);
  out << Json{{"command", "decompress"},
              {"original_len", values.size()},
              {"bytes", bytes.size()},
              {"header", header_json(message.header)},
              {"out", out_path}}
             .dump()
      << '\n';
  return kOk;
}

struct RatioArgs {
  double theta = 0.7;
  int nbits = kDefaultBits;
  std::size_t n = kDefaultChunkSize;
  std::size_t chunk = kDefaultChunkSize;
  bool include_bitmap = false;
};

int run_ratio(const RatioArgs& a, std::ostream& out) {
  CodecConfig config;
  config.sparsification.theta = a.theta;
  config.quantizer.n_bits = a.nbits;
  config.chunk_size = a.chunk;
  const double k = compression_ratio(config, a.n, a.include_bitmap);
  std::ostringstream rounded;
  rounded << std::fixed << std::setprecision(2) << k;
  out << Json{{"command", "ratio"},
              {"theta", a.theta},
              {"nbits", a.nbits},
              {"n", a.n},
              {"include_bitmap", a.include_bitmap},
              {"ratio", k},
              {"ratio_display", rounded.str()}}
             .dump()
      << '\n';
  return kOk;
}

struct InspectArgs {
  std::string in, out;
  bool spectrum = false;
  std::size_t chunk = kDefaultChunkSize;
};

int run_inspect(const InspectArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.spectrum) {
    const auto bytes = read_bytes(a.in);
    const auto message = deserialize(bytes);
    std::size_t kept = 0;
    for (const auto& c : message.chunks) kept += c.kept;
    out << Json{{"command", "inspect"},
                {"header", header_json(message.header)},
                {"chunks", message.chunks.size()},
                {"kept_codes", kept},
                {"bytes", bytes.size()}}
               .dump()
        << '\n';
    return kOk;
  }
  if (a.chunk < kMinChunkSize) throw InvalidArgument("--chunk must be at least 16");
  const auto floats = read_tensor(a.in);
  const std::vector<double> signal(floats.begin(), floats.end());
  auto sink = csv_sink(a.out, out, err);
  sink.csv() << "chunk,bin,magnitude\n" << std::setprecision(17);
  std::size_t chunks = 0;
  for (std::size_t lo = 0; lo < signal.size(); lo += a.chunk, ++chunks) {
    const std::size_t len = std::min(a.chunk, signal.size() - lo);
    const auto mags = bin_magnitudes(dft_forward(std::span(signal).subspan(lo, len)));
    for (std::size_t k = 0; k < mags.size(); ++k) sink.csv() << chunks << ',' << k << ',' << mags[k] << '\n';
  }
  *sink.summary << Json{{"command", "inspect"},
                        {"original_len", signal.size()},
                        {"chunks", chunks},
                        {"out", a.out.empty() ? "-" : a.out}}
                       .dump()
                << '\n';
  return kOk;
}

struct DumpArgs {
  double min = -1.0, max = 1.0;
  int nbits = kDefaultBits;
  int mantissa = kDefaultMantissa;
  double eps_init = kDefaultEpsInit;
  std::string out;
};

int run_quantizer_dump(const DumpArgs& a, std::ostream& out, std::ostream& err) {
  const auto q = tune_eps(a.min, a.max, a.nbits, a.mantissa, a.eps_init);
  auto sink = csv_sink(a.out, out, err);
  sink.csv() << "code,value\n" << std::setprecision(9);
  for (uint32_t c = 0; c < q.code_count(); ++c) sink.csv() << c << ',' << decode(q, c) << '\n';
  *sink.summary << Json{{"command", "quantizer-dump"},
                        {"quantizer", quantizer_json(q)},
                        {"actual_min", actual_min(q)},
                        {"codes", q.code_count()},
                        {"out", a.out.empty() ? "-" : a.out}}
                       .dump()
                << '\n';
  return kOk;
}

struct CostArgs {
  std::string profile_path, sweep, out;
  ThroughputProfile profile;
  double size = 0.0;
  double k = 0.0;
};

int run_costmodel(const CostArgs& a, std::ostream& out) {
  ThroughputProfile p = a.profile;
  if (!a.profile_path.empty()) {
    std::ifstream f(a.profile_path);
    if (!f) throw DataError("cannot open profile '" + a.profile_path + "'");
    Json j;
    try {
      j = Json::parse(f);
    } catch (const Json::exception& e) {
      throw DataError(std::string("profile: ") + e.what());
    }
    p = profile_from_json(j);
  }
  validate(p);
  const auto min_k = min_beneficial_k(p);

  Json summary{{"command", "costmodel"},
               {"profile", profile_json(p)},
               {"feasible", min_k.has_value()},
               {"min_k", null_if_infinite(min_k)}};
  if (a.size > 0.0) {
    summary["message_bytes"] = a.size;
    summary["compression_cost_s"] = compression_cost(a.size, p);
  }
  if (a.k > 0.0) {
    summary["k"] = a.k;
    summary["beneficial"] = is_beneficial(std::max(a.size, 1.0), a.k, p);
  }
  if (!a.sweep.empty()) {
    const auto range = parse_sweep_range(a.sweep);
    const auto rows = sweep(p, range.lo, range.hi, range.count);
    if (a.out.empty()) {
      std::ostringstream csv;
      write_sweep_csv(csv, rows);
      summary["csv"] = csv.str();
    } else {
      auto f = open_out(a.out);
      write_sweep_csv(f, rows);
    }
    summary["sweep_rows"] = rows.size();
    summary["out"] = a.out.empty() ? "-" : a.out;
    out << summary.dump() << '\n';
    return kOk;
  }
  out << summary.dump() << '\n';
  if (!min_k) throw Infeasible("compression cannot pay off on this profile at any ratio");
  return kOk;
}

struct BenchArgs {
  std::size_t size = std::size_t{1} << 20;
  std::size_t repeats = 5;
  double t_comm = 1.0;
  std::string out;
};

int run_bench(const BenchArgs& a, std::ostream& out) {
  const auto r = measure_profile(a.size, a.repeats, a.t_comm);
  const Json profile = profile_json(r.profile);
  if (!a.out.empty()) {
    auto f = open_out(a.out);
    f << profile.dump(2) << '\n';
  }
  out << Json{{"command", "bench"},
              {"elements", r.timings.elements},
              {"seconds",
               {{"precision", r.timings.precision},
                {"transform", r.timings.transform},
                {"packing", r.timings.packing},
                {"selection", r.timings.selection}}},
              {"profile", profile},
              {"min_k", null_if_infinite(min_beneficial_k(r.profile))},
              {"out", a.out.empty() ? "-" : a.out}}
             .dump()
      << '\n';
  return kOk;
}

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string config_path, out, hist_out;
  ProblemSpec problem;
  TrainConfig train;
  std::string problem_kind = "quadratic";
  std::string theta_schedule = "fixed";
  std::string lr_schedule = "fixed";
  std::string mode = "count";
  double clip = 0.0;
  double lipschitz = 0.0;
};

template <typename T>
void maybe(const Json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void apply_json(const Json& j, SimulateArgs& a) {
  try {
    maybe(j, "problem", a.problem_kind);
    maybe(j, "samples", a.problem.samples);
    maybe(j, "dim", a.problem.dim);
    maybe(j, "hidden", a.problem.hidden);
    maybe(j, "noise", a.problem.noise);
    maybe(j, "l2", a.problem.l2);
    maybe(j, "problem_seed", a.problem.seed);
    maybe(j, "lipschitz", a.lipschitz);
    maybe(j, "workers", a.train.workers);
    maybe(j, "batch", a.train.batch_size);
    maybe(j, "iters", a.train.iterations);
    maybe(j, "seed", a.train.seed);
    maybe(j, "lr_schedule", a.lr_schedule);
    maybe(j, "eta", a.train.eta0);
    maybe(j, "lr_decay", a.train.lr_decay);
    maybe(j, "lr_power", a.train.lr_power);
    maybe(j, "theta_schedule", a.theta_schedule);
    maybe(j, "theta", a.train.theta);
    maybe(j, "theta_after", a.train.theta_after);
    maybe(j, "switch", a.train.switch_iteration);
    maybe(j, "theta_cap", a.train.theta_cap);
    maybe(j, "theta_decay", a.train.theta_decay);
    maybe(j, "theta_power", a.train.theta_power);
    maybe(j, "mode", a.mode);
    maybe(j, "compression", a.train.compression);
    maybe(j, "nbits", a.train.quant_bits);
    maybe(j, "mantissa", a.train.mantissa_bits);
    maybe(j, "chunk", a.train.chunk_size);
    maybe(j, "clip", a.clip);
    maybe(j, "check_hypotheses", a.train.check_hypotheses);
    maybe(j, "hist_interval", a.train.histogram_interval);
    maybe(j, "hist_bins", a.train.histogram_bins);
  } catch (const Json::exception& e) {
    throw DataError(std::string("simulate config: ") + e.what());
  }
}

Json histograms_json(const ConvergenceTrace& trace) {
  Json arr = Json::array();
  for (const auto& h : trace.histograms)
    arr.push_back(Json{{"t", h.t}, {"mean", h.mean}, {"stddev", h.stddev},
                       {"min", h.min}, {"max", h.max}, {"mass", h.mass}});
  return arr;
}

Json trace_summary(const ConvergenceTrace& trace) {
  double min_g = std::numeric_limits<double>::infinity();
  double max_err = 0.0;
  for (const auto& r : trace.rows) {
    min_g = std::min(min_g, r.grad_sq_norm);
    max_err = std::max(max_err, r.err_ratio);
  }
  const bool any = !trace.rows.empty();
  return Json{{"iterations", trace.rows.size()},
              {"final_loss", any ? Json(trace.rows.back().loss) : Json(nullptr)},
              {"final_grad_sq_norm", any ? Json(trace.rows.back().grad_sq_norm) : Json(nullptr)},
              {"min_grad_sq_norm", any ? Json(min_g) : Json(nullptr)},
              {"max_err_ratio", max_err},
              {"lipschitz", trace.lipschitz},
              {"lipschitz_exact", trace.lipschitz_exact},
              {"sigma2_at_x0", trace.sigma2}};
}

void write_hist_output(const SimulateArgs& a, const ConvergenceTrace& trace) {
  if (a.hist_out.empty()) return;
  auto f = open_out(a.hist_out);
  f << histograms_json(trace).dump(2) << '\n';
}

int run_simulate(SimulateArgs a, std::ostream& out, std::ostream& err) {
  a.problem.kind = parse_problem_kind(a.problem_kind);
  a.train.theta_schedule = parse_theta_schedule(a.theta_schedule);
  a.train.lr_schedule = parse_lr_schedule(a.lr_schedule);
  a.train.mode = parse_drop_mode(a.mode);
  if (a.clip > 0.0) a.train.clip = a.clip;
  if (a.lipschitz > 0.0) a.problem.lipschitz = a.lipschitz;
  if (const auto s = seed_override()) {
    a.train.seed = *s;
    a.problem.seed = *s;
  }

  const Problem problem(a.problem);
  Json summary{{"command", "simulate"},
               {"problem", a.problem_kind},
               {"workers", a.train.workers},
               {"batch", a.train.batch_size},
               {"theta_schedule", a.theta_schedule},
               {"mode", a.mode},
               {"seed", a.train.seed}};
  auto sink = csv_sink(a.out, out, err);
  const auto report = [&](const ConvergenceTrace& trace, bool diverged) {
    write_trace_csv(sink.csv(), trace);
    write_hist_output(a, trace);
    summary["diverged"] = diverged;
    summary["trace"] = trace_summary(trace);
    summary["out"] = a.out.empty() ? "-" : a.out;
    *sink.summary << summary.dump() << '\n';
  };
  try {
    report(run(problem, a.train), false);
    return kOk;
  } catch (const TrainingDiverged& e) {
    report(e.partial(), true);
    throw Infeasible(e.what());
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw_args;
  if (args.size() >= 2 && args[0] == "quantizer" && args[1] == "dump") {
    args.erase(args.begin());
    args[0] = "quantizer-dump";
  }

  CLI::App app{"Frequency-domain gradient compression toolkit", "fgc"};
  app.require_subcommand(1);

  CompressArgs compress_args;
  auto* c = app.add_subcommand("compress", "Compress a raw f32 tensor into an .fgc message");
  c->add_option("--in", compress_args.in, "Input tensor file")->required();
  c->add_option("--out", compress_args.out, "Output .fgc file")->required();
  c->add_option("--theta", compress_args.theta, "Frequency dropout ratio")->check(CLI::Range(0.0, 1.0));
  c->add_option("--nbits", compress_args.nbits, "Code width N (2-16, or 32 for passthrough)");
  c->add_option("--mantissa", compress_args.mantissa, "Mantissa bits m");
  c->add_option("--mode", compress_args.mode, "count or energy")->check(CLI::IsMember({"count", "energy"}));
  c->add_option("--chunk", compress_args.chunk, "Transform chunk size");
  c->add_flag("--half", compress_args.half, "binary16 round trip before the transform");
  c->add_option("--range", compress_args.range, "Symmetric quantizer range r (default: calibrate)");

  std::string dec_in, dec_out;
  auto* d = app.add_subcommand("decompress", "Decompress an .fgc message into a raw f32 tensor");
  d->add_option("--in", dec_in, "Input .fgc file")->required();
  d->add_option("--out", dec_out, "Output tensor file")->required();

  RatioArgs ratio_args;
  auto* r = app.add_subcommand("ratio", "Analytic compression ratio");
  r->add_option("--theta", ratio_args.theta, "Frequency dropout ratio")->check(CLI::Range(0.0, 1.0));
  r->add_option("--nbits", ratio_args.nbits, "Code width N");
  r->add_option("--n", ratio_args.n, "Gradient length (bitmap accounting)");
  r->add_option("--chunk", ratio_args.chunk, "Transform chunk size");
  r->add_flag("--include-bitmap", ratio_args.include_bitmap, "Account for bitmap and headers");

  InspectArgs inspect_args;
  auto* i = app.add_subcommand("inspect", "Describe an .fgc message, or dump a tensor's spectrum");
  i->add_option("--in", inspect_args.in, "Input file")->required();
  i->add_flag("--spectrum", inspect_args.spectrum, "Dump bin magnitudes of a raw tensor as CSV");
  i->add_option("--chunk", inspect_args.chunk, "Transform chunk size");
  i->add_option("--out", inspect_args.out, "CSV output path");

  DumpArgs dump_args;
  auto* q = app.add_subcommand("quantizer-dump", "Print every decoded code of a tuned quantizer as CSV");
  q->add_option("--min", dump_args.min, "Lower range bound");
  q->add_option("--max", dump_args.max, "Upper range bound");
  q->add_option("--nbits", dump_args.nbits, "Code width N");
  q->add_option("--mantissa", dump_args.mantissa, "Mantissa bits m");
  q->add_option("--eps-init", dump_args.eps_init, "Initial eps for tuning");
  q->add_option("--out", dump_args.out, "CSV output path");

  CostArgs cost_args;
  auto* m = app.add_subcommand("costmodel", "Evaluate when compression pays off");
  m->add_option("--profile", cost_args.profile_path, "Profile JSON with t_m,t_f,t_p,t_s,t_comm (GB/s)");
  m->add_option("--tm", cost_args.profile.t_m, "Precision/threshold throughput");
  m->add_option("--tf", cost_args.profile.t_f, "Transform throughput");
  m->add_option("--tp", cost_args.profile.t_p, "Packing throughput");
  m->add_option("--ts", cost_args.profile.t_s, "Selection throughput");
  m->add_option("--tcomm", cost_args.profile.t_comm, "Network throughput");
  m->add_option("--sweep", cost_args.sweep, "tcomm=LO:HI:COUNT");
  m->add_option("--size", cost_args.size, "Message size in bytes");
  m->add_option("--k", cost_args.k, "Compression ratio to test");
  m->add_option("--out", cost_args.out, "Sweep CSV output path");

  BenchArgs bench_args;
  auto* b = app.add_subcommand("bench", "Measure this machine's stage throughputs");
  b->add_option("--size", bench_args.size, "Gradient length");
  b->add_option("--repeats", bench_args.repeats, "Passes per stage");
  b->add_option("--tcomm", bench_args.t_comm, "Network throughput recorded in the profile");
  b->add_option("--out", bench_args.out, "Profile JSON output path");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Bulk-synchronous SGD with compressed gradients");
  // Options registered here override values loaded from --config.
  std::vector<std::pair<CLI::Option*, std::function<void(SimulateArgs&)>>> overrides;
  SimulateArgs flags;
  const auto opt = [&](const std::string& name, auto& flag_field, auto member, const std::string& help) {
    auto* o = s->add_option(name, flag_field, help);
    overrides.emplace_back(o, [member, &flag_field](SimulateArgs& dst) { member(dst) = flag_field; });
    return o;
  };
  s->add_option("--config", sim.config_path, "JSON config");
  s->add_option("--out", sim.out, "Trace CSV output path");
  s->add_option("--hist-out", sim.hist_out, "Histogram JSON output path");
  opt("--problem", flags.problem_kind, [](SimulateArgs& x) -> auto& { return x.problem_kind; }, "quadratic, logistic or mlp")
      ->check(CLI::IsMember({"quadratic", "logistic", "mlp"}));
  opt("--samples", flags.problem.samples, [](SimulateArgs& x) -> auto& { return x.problem.samples; }, "Dataset size");
  opt("--dim", flags.problem.dim, [](SimulateArgs& x) -> auto& { return x.problem.dim; }, "Feature count");
  opt("--hidden", flags.problem.hidden, [](SimulateArgs& x) -> auto& { return x.problem.hidden; }, "MLP hidden units");
  opt("--noise", flags.problem.noise, [](SimulateArgs& x) -> auto& { return x.problem.noise; }, "Label noise");
  opt("--problem-seed", flags.problem.seed, [](SimulateArgs& x) -> auto& { return x.problem.seed; }, "Dataset seed");
  opt("--lipschitz", flags.lipschitz, [](SimulateArgs& x) -> auto& { return x.lipschitz; }, "Lipschitz upper estimate");
  opt("--workers", flags.train.workers, [](SimulateArgs& x) -> auto& { return x.train.workers; }, "Logical workers");
  opt("--batch", flags.train.batch_size, [](SimulateArgs& x) -> auto& { return x.train.batch_size; }, "Global batch size");
  opt("--iters", flags.train.iterations, [](SimulateArgs& x) -> auto& { return x.train.iterations; }, "Iterations");
  opt("--seed", flags.train.seed, [](SimulateArgs& x) -> auto& { return x.train.seed; }, "Sampling seed");
  opt("--lr-schedule", flags.lr_schedule, [](SimulateArgs& x) -> auto& { return x.lr_schedule; }, "fixed or diminishing")
      ->check(CLI::IsMember({"fixed", "diminishing"}));
  opt("--eta", flags.train.eta0, [](SimulateArgs& x) -> auto& { return x.train.eta0; }, "Initial learning rate (0: 1/(4L))");
  opt("--lr-decay", flags.train.lr_decay, [](SimulateArgs& x) -> auto& { return x.train.lr_decay; }, "eta0/(1+t/decay)^p");
  opt("--lr-power", flags.train.lr_power, [](SimulateArgs& x) -> auto& { return x.train.lr_power; }, "Decay power p");
  opt("--theta-schedule", flags.theta_schedule, [](SimulateArgs& x) -> auto& { return x.theta_schedule; },
      "fixed, stepwise, diminishing or polynomial")
      ->check(CLI::IsMember({"fixed", "stepwise", "diminishing", "polynomial"}));
  opt("--theta", flags.train.theta, [](SimulateArgs& x) -> auto& { return x.train.theta; }, "Dropout ratio");
  opt("--theta-after", flags.train.theta_after, [](SimulateArgs& x) -> auto& { return x.train.theta_after; }, "Stepwise ratio after the switch");
  opt("--switch", flags.train.switch_iteration, [](SimulateArgs& x) -> auto& { return x.train.switch_iteration; }, "Stepwise switch iteration");
  opt("--mode", flags.mode, [](SimulateArgs& x) -> auto& { return x.mode; }, "count or energy")
      ->check(CLI::IsMember({"count", "energy"}));
  opt("--nbits", flags.train.quant_bits, [](SimulateArgs& x) -> auto& { return x.train.quant_bits; }, "Quantizer bits (0: passthrough)");
  opt("--mantissa", flags.train.mantissa_bits, [](SimulateArgs& x) -> auto& { return x.train.mantissa_bits; }, "Mantissa bits");
  opt("--chunk", flags.train.chunk_size, [](SimulateArgs& x) -> auto& { return x.train.chunk_size; }, "Transform chunk size");
  opt("--clip", flags.clip, [](SimulateArgs& x) -> auto& { return x.clip; }, "Clip gradient entries to [-c, c]");
  opt("--hist-interval", flags.train.histogram_interval, [](SimulateArgs& x) -> auto& { return x.train.histogram_interval; },
      "Iterations between gradient histograms");
  s->add_flag("--no-compression", "Send raw gradients");
  s->add_flag("--check-hypotheses", sim.train.check_hypotheses, "Enforce the descent lemma's step-size conditions");

  std::vector<const char*> argv{"fgc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (c->parsed()) return run_compress(compress_args, out);
    if (d->parsed()) return run_decompress(dec_in, dec_out, out);
    if (r->parsed()) return run_ratio(ratio_args, out);
    if (i->parsed()) return run_inspect(inspect_args, out, err);
    if (q->parsed()) return run_quantizer_dump(dump_args, out, err);
    if (m->parsed()) return run_costmodel(cost_args, out);
    if (b->parsed()) return run_bench(bench_args, out);
    if (s->parsed()) {
      const bool check = sim.train.check_hypotheses;
      if (!sim.config_path.empty()) {
        std::ifstream f(sim.config_path);
        if (!f) throw DataError("cannot open config '" + sim.config_path + "'");
        Json j;
        try {
          j = Json::parse(f);
        } catch (const Json::exception& e) {
          throw DataError(std::string("simulate config: ") + e.what());
        }
        apply_json(j, sim);
      }
      for (const auto& [o, apply] : overrides)
        if (o->count() > 0) apply(sim);
      if (s->count("--no-compression") > 0) sim.train.compression = false;
      if (check) sim.train.check_hypotheses = true;
      return run_simulate(sim, out, err);
    }
  } catch (const Infeasible& e) {
    err << "fgc: " << e.what() << '\n';
    return kInfeasible;
  } catch (const DivergenceError& e) {
    err << "fgc: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InvalidArgument& e) {
    err << "fgc: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "fgc: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace fgc::cli
