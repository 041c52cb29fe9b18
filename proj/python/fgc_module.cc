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

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "fgc/codec.h"
#include "fgc/costmodel.h"
#include "fgc/error.h"
#include "fgc/quantizer.h"
#include "fgc/simulator.h"
#include "fgc/spectral.h"

namespace py = pybind11;

namespace {

using fgc::CodecConfig;
using fgc::QuantizerConfig;

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& a) {
  if (a.ndim() != 1) throw fgc::InvalidArgument("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::bytes compress_py(const DoubleArray& gradient, double theta, const std::string& mode, int n_bits,
                      int mantissa_bits, std::size_t chunk_size, bool half_precision,
                      std::optional<double> range) {
  const auto g = to_vector(gradient);
  CodecConfig c;
  c.sparsification = {theta, fgc::parse_drop_mode(mode), fgc::Domain::kFrequency};
  c.chunk_size = chunk_size;
  c.half_precision_pass = half_precision;
  if (n_bits != fgc::kPassthroughBits) {
    if (range) {
      c.quantizer = fgc::tune_eps(-*range, *range, n_bits, mantissa_bits, fgc::kDefaultEpsInit * *range);
    } else {
      const std::vector<std::vector<double>> samples{g};
      c.quantizer = fgc::calibrate(samples, n_bits, mantissa_bits, c.sparsification, chunk_size);
    }
  }
  const auto bytes = fgc::serialize(fgc::compress(g, c));
  return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::vector<uint8_t> bytes_of(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict header_dict(const fgc::CompressedMessage& m) {
  const auto& h = m.header;
  py::dict d;
  d["version"] = h.version;
  d["flags"] = h.flags;
  d["original_len"] = h.original_len;
  d["chunk_size"] = h.chunk_size;
  d["theta"] = h.theta;
  d["min"] = h.min;
  d["max"] = h.max;
  d["eps"] = h.eps;
  d["n_bits"] = h.n_bits;
  d["mantissa_bits"] = h.mantissa_bits;
  std::vector<uint32_t> kept;
  for (const auto& c : m.chunks) kept.push_back(c.kept);
  d["kept"] = kept;
  return d;
}

py::dict simulate_py(const std::string& problem, std::size_t samples, std::size_t dim, std::size_t workers,
                     std::size_t batch, std::size_t iterations, uint64_t seed, double eta, double theta,
                     const std::string& theta_schedule, double theta_after, std::size_t switch_iteration,
                     const std::string& lr_schedule, double lr_decay, const std::string& mode,
                     int quant_bits, bool compression) {
  fgc::ProblemSpec spec;
  spec.kind = fgc::parse_problem_kind(problem);
  spec.samples = samples;
  spec.dim = dim;
  fgc::TrainConfig c;
  c.workers = workers;
  c.batch_size = batch;
  c.iterations = iterations;
  c.seed = seed;
  c.eta0 = eta;
  c.theta = theta;
  c.theta_schedule = fgc::parse_theta_schedule(theta_schedule);
  c.theta_after = theta_after;
  c.switch_iteration = switch_iteration;
  c.lr_schedule = fgc::parse_lr_schedule(lr_schedule);
  c.lr_decay = lr_decay;
  c.mode = fgc::parse_drop_mode(mode);
  c.quant_bits = quant_bits;
  c.compression = compression;

  const fgc::Problem p(spec);
  const auto trace = fgc::run(p, c);
  std::vector<double> loss, grad, th, eta_col, err;
  for (const auto& r : trace.rows) {
    loss.push_back(r.loss);
    grad.push_back(r.grad_sq_norm);
    th.push_back(r.theta);
    eta_col.push_back(r.eta);
    err.push_back(r.err_ratio);
  }
  py::dict d;
  d["loss"] = to_array(loss);
  d["grad_sq_norm"] = to_array(grad);
  d["theta"] = to_array(th);
  d["eta"] = to_array(eta_col);
  d["err_ratio"] = to_array(err);
  d["lipschitz"] = trace.lipschitz;
  d["sigma2"] = trace.sigma2;
  d["final_x"] = to_array(trace.final_x);
  return d;
}

}  // namespace

PYBIND11_MODULE(_fgc, m) {
  m.doc() = "Frequency-domain gradient compression";

  static py::exception<fgc::DataError> data_error(m, "DataError", PyExc_ValueError);
  static py::exception<fgc::DivergenceError> divergence_error(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fgc::DataError& e) {
      data_error(e.what());
    } catch (const fgc::DivergenceError& e) {
      divergence_error(e.what());
    }
  });

  py::class_<QuantizerConfig>(m, "Quantizer")
      .def_readonly("min", &QuantizerConfig::min)
      .def_readonly("max", &QuantizerConfig::max)
      .def_readonly("n_bits", &QuantizerConfig::n_bits)
      .def_readonly("mantissa_bits", &QuantizerConfig::mantissa_bits)
      .def_readonly("eps", &QuantizerConfig::eps)
      .def_readonly("pbase", &QuantizerConfig::pbase)
      .def_readonly("pos_count", &QuantizerConfig::pos_count)
      .def_property_readonly("actual_min", [](const QuantizerConfig& q) { return fgc::actual_min(q); })
      .def("encode", [](const QuantizerConfig& q, float x) { return fgc::encode(q, x); })
      .def("decode", [](const QuantizerConfig& q, uint32_t c) { return fgc::decode(q, c); })
      .def("__repr__", [](const QuantizerConfig& q) {
        return "Quantizer(min=" + std::to_string(q.min) + ", max=" + std::to_string(q.max) +
               ", n_bits=" + std::to_string(q.n_bits) + ", mantissa_bits=" + std::to_string(q.mantissa_bits) +
               ", eps=" + std::to_string(q.eps) + ")";
      });

  m.def("tune_eps", &fgc::tune_eps, py::arg("min"), py::arg("max"), py::arg("n_bits") = fgc::kDefaultBits,
        py::arg("mantissa_bits") = fgc::kDefaultMantissa, py::arg("eps_init") = fgc::kDefaultEpsInit);

  m.def("dft_forward", [](const DoubleArray& x) { return fgc::dft_forward(to_vector(x)).coefficients; },
        py::arg("signal"));
  m.def(
      "dft_inverse",
      [](const std::vector<fgc::Complex>& coefficients, std::size_t n) {
        return to_array(fgc::dft_inverse(fgc::Spectrum{coefficients, n}));
      },
      py::arg("coefficients"), py::arg("n"));
  m.def(
      "sparsify",
      [](const DoubleArray& x, double theta, const std::string& mode, const std::string& domain) {
        const auto v = to_vector(x);
        const auto drop = fgc::parse_drop_mode(mode);
        if (domain == "time") return to_array(fgc::sparsify_time(v, {theta, drop, fgc::Domain::kTime}).values);
        if (domain != "frequency") throw fgc::InvalidArgument("domain must be 'frequency' or 'time'");
        return to_array(fgc::dft_inverse(fgc::truncate(fgc::dft_forward(v), {theta, drop}).spectrum));
      },
      py::arg("signal"), py::arg("theta"), py::arg("mode") = "count", py::arg("domain") = "frequency");

  m.def("compress", &compress_py, py::arg("gradient"), py::arg("theta") = 0.7, py::arg("mode") = "count",
        py::arg("n_bits") = fgc::kDefaultBits, py::arg("mantissa_bits") = fgc::kDefaultMantissa,
        py::arg("chunk_size") = fgc::kDefaultChunkSize, py::arg("half_precision") = false,
        py::arg("range") = py::none());
  m.def("decompress", [](const py::bytes& b) { return to_array(fgc::decompress(fgc::deserialize(bytes_of(b)))); },
        py::arg("message"));
  m.def("inspect", [](const py::bytes& b) { return header_dict(fgc::deserialize(bytes_of(b))); },
        py::arg("message"));
  m.def(
      "compression_ratio",
      [](double theta, int n_bits, std::size_t n, bool include_bitmap, std::size_t chunk_size) {
        CodecConfig c;
        c.sparsification.theta = theta;
        c.quantizer.n_bits = n_bits;
        c.chunk_size = chunk_size;
        return fgc::compression_ratio(c, n, include_bitmap);
      },
      py::arg("theta"), py::arg("n_bits") = fgc::kDefaultBits, py::arg("n") = fgc::kDefaultChunkSize,
      py::arg("include_bitmap") = false, py::arg("chunk_size") = fgc::kDefaultChunkSize);

  m.def(
      "min_beneficial_k",
      [](double t_m, double t_f, double t_p, double t_s, double t_comm) {
        return fgc::min_beneficial_k({t_m, t_f, t_p, t_s, t_comm});
      },
      py::arg("t_m"), py::arg("t_f"), py::arg("t_p"), py::arg("t_s"), py::arg("t_comm"),
      "Smallest worthwhile compression ratio, or None when compression never pays off.");

  m.def("simulate", &simulate_py, py::arg("problem") = "quadratic", py::arg("samples") = 512,
        py::arg("dim") = 50, py::arg("workers") = 4, py::arg("batch") = 8, py::arg("iterations") = 1000,
        py::arg("seed") = 1, py::arg("eta") = 0.0, py::arg("theta") = 0.0, py::arg("theta_schedule") = "fixed",
        py::arg("theta_after") = 0.0, py::arg("switch_iteration") = 0, py::arg("lr_schedule") = "fixed",
        py::arg("lr_decay") = 1.0, py::arg("mode") = "count", py::arg("quant_bits") = 0,
        py::arg("compression") = true);
}
