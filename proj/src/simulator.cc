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

#include "fgc/simulator.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace fgc {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sq_norm(std::span<const double> a) { return dot(a, a); }

uint64_t splitmix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow.
double logistic_loss(double margin) {
  if (margin > 0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

// Solves the symmetric positive definite system M x = b in place.
std::vector<double> cholesky_solve(std::vector<double> m, std::vector<double> b, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double s = m[j * d + j];
    for (std::size_t k = 0; k < j; ++k) s -= m[j * d + k] * m[j * d + k];
    if (s <= 0.0) throw InvalidArgument("normal equations are not positive definite");
    const double ljj = std::sqrt(s);
    m[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = m[i * d + j];
      for (std::size_t k = 0; k < j; ++k) t -= m[i * d + k] * m[j * d + k];
      m[i * d + j] = t / ljj;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= m[i * d + k] * b[k];
    b[i] /= m[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t k = i + 1; k < d; ++k) b[i] -= m[k * d + i] * b[k];
    b[i] /= m[i * d + i];
  }
  return b;
}

std::vector<double> gram(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
  std::vector<double> g(cols * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &a[r * cols];
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t j = i; j < cols; ++j) g[i * cols + j] += row[i] * row[j];
  }
  const double inv = 1.0 / static_cast<double>(rows);
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = i; j < cols; ++j) {
      g[i * cols + j] *= inv;
      g[j * cols + i] = g[i * cols + j];
    }
  return g;
}

}  // namespace

// --- names ----------------------------------------------------------------

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "quadratic") return ProblemKind::kQuadratic;
  if (name == "logistic") return ProblemKind::kLogistic;
  if (name == "mlp") return ProblemKind::kMlp;
  throw InvalidArgument("unknown problem '" + std::string(name) + "'");
}

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kQuadratic: return "quadratic";
    case ProblemKind::kLogistic: return "logistic";
    case ProblemKind::kMlp: return "mlp";
  }
  return "?";
}

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "fixed") return LrSchedule::kFixed;
  if (name == "diminishing") return LrSchedule::kDiminishing;
  throw InvalidArgument("unknown learning-rate schedule '" + std::string(name) + "'");
}

ThetaSchedule parse_theta_schedule(std::string_view name) {
  if (name == "fixed") return ThetaSchedule::kFixed;
  if (name == "stepwise") return ThetaSchedule::kStepwise;
  if (name == "diminishing") return ThetaSchedule::kDiminishing;
  if (name == "polynomial") return ThetaSchedule::kPolynomial;
  throw InvalidArgument("unknown theta schedule '" + std::string(name) + "'");
}

std::string_view to_string(LrSchedule s) {
  return s == LrSchedule::kFixed ? "fixed" : "diminishing";
}

std::string_view to_string(ThetaSchedule s) {
  switch (s) {
    case ThetaSchedule::kFixed: return "fixed";
    case ThetaSchedule::kStepwise: return "stepwise";
    case ThetaSchedule::kDiminishing: return "diminishing";
    case ThetaSchedule::kPolynomial: return "polynomial";
  }
  return "?";
}

// --- problems ---------------------------------------------------------------

double power_iteration(std::span<const double> matrix, std::size_t dim, double tolerance,
                       int max_iterations) {
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> w(dim);
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < dim; ++i) w[i] = dot(matrix.subspan(i * dim, dim), v);
    const double next = std::sqrt(sq_norm(w));
    if (next == 0.0) return 0.0;
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / next;
    if (std::abs(next - lambda) <= tolerance * next) return next;
    lambda = next;
  }
  return lambda;
}

Problem::Problem(const ProblemSpec& spec) : spec_(spec) {
  if (spec.samples == 0 || spec.dim == 0) throw InvalidArgument("problem: empty dataset");
  if (spec.kind == ProblemKind::kMlp && (spec.hidden == 0 || spec.hidden > 64))
    throw InvalidArgument("problem: mlp hidden width must be in [1, 64]");
  if (spec.noise < 0.0 || spec.l2 < 0.0) throw InvalidArgument("problem: negative noise or l2");

  const std::size_t n = spec.samples;
  const std::size_t d = spec.dim;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  features_.resize(n * d);
  targets_.resize(n);
  for (double& a : features_) a = normal(rng);
  const auto row = [&](std::size_t i) { return std::span<const double>(&features_[i * d], d); };

  const auto feature_gram = gram(features_, n, d);
  const double feature_lambda = power_iteration(feature_gram, d);

  switch (spec.kind) {
    case ProblemKind::kQuadratic: {
      parameters_ = d;
      std::vector<double> truth(d);
      for (double& t : truth) t = normal(rng);
      for (std::size_t i = 0; i < n; ++i) targets_[i] = dot(row(i), truth) + spec.noise * normal(rng);
      hessian_ = feature_gram;
      linear_.assign(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) linear_[k] += features_[i * d + k] * targets_[i];
      for (double& c : linear_) c /= static_cast<double>(n);
      offset_ = 0.5 * sq_norm(targets_) / static_cast<double>(n);
      lipschitz_ = feature_lambda;
      lipschitz_exact_ = true;
      break;
    }
    case ProblemKind::kLogistic: {
      parameters_ = d;
      std::vector<double> truth(d);
      const double scale = 2.0 / std::sqrt(static_cast<double>(d));
      for (double& t : truth) t = scale * normal(rng);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i)
        targets_[i] = unit(rng) < sigmoid(dot(row(i), truth)) ? 1.0 : -1.0;
      lipschitz_ = feature_lambda / 4.0 + spec.l2;
      lipschitz_exact_ = false;  // a tight upper bound, not the constant itself
      break;
    }
    case ProblemKind::kMlp: {
      const std::size_t h = spec.hidden;
      parameters_ = h * d + 2 * h + 1;
      std::vector<double> teacher(parameters_);
      for (std::size_t k = 0; k < h * d; ++k) teacher[k] = normal(rng) / std::sqrt(static_cast<double>(d));
      for (std::size_t k = 0; k < h; ++k) teacher[h * d + h + k] = normal(rng) / std::sqrt(static_cast<double>(h));
      for (std::size_t i = 0; i < n; ++i) {
        double out = 0.0;
        for (std::size_t u = 0; u < h; ++u)
          out += teacher[h * d + h + u] * std::tanh(dot(row(i), std::span(&teacher[u * d], d)));
        targets_[i] = out + spec.noise * normal(rng);
      }
      lipschitz_ = 1.0 + feature_lambda * (1.0 + static_cast<double>(h)) + spec.l2;
      lipschitz_exact_ = false;
      break;
    }
  }
  if (spec.lipschitz) {
    if (!(*spec.lipschitz > 0.0)) throw InvalidArgument("problem: lipschitz must be positive");
    lipschitz_ = *spec.lipschitz;
    lipschitz_exact_ = false;
  }
}

std::vector<double> Problem::initial_point() const {
  std::vector<double> x(parameters_, 0.0);
  if (spec_.kind == ProblemKind::kMlp) {
    std::mt19937_64 rng(splitmix64(spec_.seed) ^ 0x5EEDull);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (double& v : x) v = normal(rng);
  }
  return x;
}

void Problem::add_example_gradient(std::span<const double> x, std::size_t j, double scale,
                                   std::span<double> out) const {
  const std::size_t d = spec_.dim;
  const std::span<const double> a(&features_[j * d], d);
  switch (spec_.kind) {
    case ProblemKind::kQuadratic: {
      const double r = scale * (dot(a, x) - targets_[j]);
      for (std::size_t k = 0; k < d; ++k) out[k] += r * a[k];
      break;
    }
    case ProblemKind::kLogistic: {
      const double s = targets_[j];
      const double c = -s * sigmoid(-s * dot(a, x)) * scale;
      for (std::size_t k = 0; k < d; ++k) out[k] += c * a[k] + scale * spec_.l2 * x[k];
      break;
    }
    case ProblemKind::kMlp: {
      const std::size_t h = spec_.hidden;
      const std::size_t b1 = h * d, w2 = b1 + h, b2 = w2 + h;
      thread_local std::vector<double> act;
      act.resize(h);
      double pred = x[b2];
      for (std::size_t u = 0; u < h; ++u) {
        act[u] = std::tanh(dot(a, x.subspan(u * d, d)) + x[b1 + u]);
        pred += x[w2 + u] * act[u];
      }
      const double r = scale * (pred - targets_[j]);
      out[b2] += r;
      for (std::size_t u = 0; u < h; ++u) {
        out[w2 + u] += r * act[u];
        const double dz = r * x[w2 + u] * (1.0 - act[u] * act[u]);
        out[b1 + u] += dz;
        for (std::size_t k = 0; k < d; ++k) out[u * d + k] += dz * a[k];
      }
      for (std::size_t k = 0; k < parameters_; ++k) out[k] += scale * spec_.l2 * x[k];
      break;
    }
  }
}

double Problem::loss(std::span<const double> x) const {
  if (x.size() != parameters_) throw InvalidArgument("loss: parameter size mismatch");
  const std::size_t n = spec_.samples;
  const std::size_t d = spec_.dim;
  switch (spec_.kind) {
    case ProblemKind::kQuadratic: {
      // x^T H x / 2 - c^T x + |y|^2 / 2N
      double quad = 0.0;
      for (std::size_t i = 0; i < d; ++i) quad += x[i] * dot(std::span(&hessian_[i * d], d), x);
      return std::max(0.0, 0.5 * quad - dot(linear_, x) + offset_);
    }
    case ProblemKind::kLogistic: {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        total += logistic_loss(targets_[i] * dot(std::span(&features_[i * d], d), x));
      return total / static_cast<double>(n) + 0.5 * spec_.l2 * sq_norm(x);
    }
    case ProblemKind::kMlp: {
      const std::size_t h = spec_.hidden;
      const std::size_t b1 = h * d, w2 = b1 + h, b2 = w2 + h;
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> a(&features_[i * d], d);
        double pred = x[b2];
        for (std::size_t u = 0; u < h; ++u)
          pred += x[w2 + u] * std::tanh(dot(a, x.subspan(u * d, d)) + x[b1 + u]);
        total += 0.5 * (pred - targets_[i]) * (pred - targets_[i]);
      }
      return total / static_cast<double>(n) + 0.5 * spec_.l2 * sq_norm(x);
    }
  }
  return 0.0;
}

std::vector<double> Problem::gradient(std::span<const double> x) const {
  if (x.size() != parameters_) throw InvalidArgument("gradient: parameter size mismatch");
  std::vector<double> g(parameters_, 0.0);
  if (spec_.kind == ProblemKind::kQuadratic) {
    const std::size_t d = spec_.dim;
    for (std::size_t i = 0; i < d; ++i)
      g[i] = dot(std::span(&hessian_[i * d], d), x) - linear_[i];
    return g;
  }
  const double scale = 1.0 / static_cast<double>(spec_.samples);
  for (std::size_t j = 0; j < spec_.samples; ++j) add_example_gradient(x, j, scale, g);
  return g;
}

std::vector<double> Problem::example_gradient(std::span<const double> x, std::size_t j) const {
  if (x.size() != parameters_) throw InvalidArgument("gradient: parameter size mismatch");
  if (j >= spec_.samples) throw InvalidArgument("example index out of range");
  std::vector<double> g(parameters_, 0.0);
  add_example_gradient(x, j, 1.0, g);
  return g;
}

std::vector<double> Problem::sub_gradient(std::span<const double> x,
                                          std::span<const std::size_t> batch) const {
  if (batch.empty()) throw InvalidArgument("sub_gradient: empty batch");
  if (x.size() != parameters_) throw InvalidArgument("sub_gradient: parameter size mismatch");
  std::vector<double> g(parameters_, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j : batch) {
    if (j >= spec_.samples) throw InvalidArgument("sub_gradient: index out of range");
    add_example_gradient(x, j, scale, g);
  }
  return g;
}

double Problem::gradient_variance(std::span<const double> x) const {
  const auto full = gradient(x);
  double total = 0.0;
  for (std::size_t j = 0; j < spec_.samples; ++j) {
    const auto gj = example_gradient(x, j);
    for (std::size_t k = 0; k < parameters_; ++k) total += (gj[k] - full[k]) * (gj[k] - full[k]);
  }
  return total / static_cast<double>(spec_.samples);
}

std::vector<double> Problem::minimizer() const {
  if (spec_.kind != ProblemKind::kQuadratic)
    throw InvalidArgument("minimizer: closed form only exists for the quadratic problem");
  return cholesky_solve(hessian_, linear_, spec_.dim);
}

// --- schedules ----------------------------------------------------------------

double learning_rate(const TrainConfig& c, double lipschitz, std::size_t t) {
  const double eta0 = c.eta0 > 0.0 ? c.eta0 : 1.0 / (4.0 * lipschitz);
  if (c.lr_schedule == LrSchedule::kFixed) return eta0;
  return eta0 / std::pow(1.0 + static_cast<double>(t) / c.lr_decay, c.lr_power);
}

double dropout_ratio(const TrainConfig& c, double lipschitz, std::size_t t) {
  double theta = 0.0;
  switch (c.theta_schedule) {
    case ThetaSchedule::kFixed: theta = c.theta; break;
    case ThetaSchedule::kStepwise: theta = t < c.switch_iteration ? c.theta : c.theta_after; break;
    case ThetaSchedule::kDiminishing:
      theta = std::min(c.theta_cap, std::sqrt(lipschitz * learning_rate(c, lipschitz, t)));
      break;
    case ThetaSchedule::kPolynomial:
      theta = c.theta / std::pow(1.0 + static_cast<double>(t) / c.theta_decay, c.theta_power);
      break;
  }
  return std::clamp(theta, 0.0, 1.0);
}

void validate(const TrainConfig& c, const Problem& problem) {
  if (c.workers == 0) throw InvalidArgument("train: need at least one worker");
  if (c.batch_size < c.workers) throw InvalidArgument("train: batch smaller than worker count");
  if (c.workers > problem.samples()) throw InvalidArgument("train: more workers than samples");
  if (c.iterations == 0) throw InvalidArgument("train: zero iterations");
  if (c.eta0 < 0.0 || !std::isfinite(c.eta0)) throw InvalidArgument("train: bad eta0");
  if (c.lr_schedule == LrSchedule::kDiminishing && !(c.lr_decay > 0.0))
    throw InvalidArgument("train: lr_decay must be positive");
  for (double th : {c.theta, c.theta_after, c.theta_cap})
    if (!(th >= 0.0 && th <= 1.0)) throw InvalidArgument("train: theta values must lie in [0, 1]");
  if (c.theta_schedule == ThetaSchedule::kPolynomial && !(c.theta_decay > 0.0))
    throw InvalidArgument("train: theta_decay must be positive");
  if (c.quant_bits != 0 && (c.quant_bits < 2 || c.quant_bits > 16))
    throw InvalidArgument("train: quant_bits must be 0 or in [2, 16]");
  if (c.chunk_size < kMinChunkSize) throw InvalidArgument("train: chunk_size below minimum");
  if (c.clip && !(*c.clip > 0.0)) throw InvalidArgument("train: clip must be positive");
  if (c.histogram_interval > 0 && c.histogram_bins == 0)
    throw InvalidArgument("train: histogram_bins must be positive");

  if (!c.check_hypotheses) return;
  const double lip = problem.lipschitz();
  const double eta_limit = 1.0 / (4.0 * lip) * (1.0 + 1e-12);
  if (learning_rate(c, lip, 0) > eta_limit)
    throw InvalidArgument("train: eta exceeds 1/(4L)");
  if (c.lr_schedule == LrSchedule::kDiminishing && !(c.lr_power > 0.5 && c.lr_power <= 1.0))
    throw InvalidArgument("train: diminishing eta needs sum eta = inf and sum eta^2 < inf (0.5 < p <= 1)");
  switch (c.theta_schedule) {
    case ThetaSchedule::kFixed:
    case ThetaSchedule::kPolynomial:
      if (c.theta * c.theta > 0.25) throw InvalidArgument("train: theta^2 exceeds 1/4");
      break;
    case ThetaSchedule::kStepwise:
      if (std::max(c.theta, c.theta_after) > 0.5) throw InvalidArgument("train: theta^2 exceeds 1/4");
      break;
    case ThetaSchedule::kDiminishing:
      break;  // theta^2 = L eta <= 1/4 follows from the eta check
  }
}

// --- training -----------------------------------------------------------------

std::vector<double> step(std::span<const double> x, std::span<const double> v_hat, double eta) {
  if (x.size() != v_hat.size()) throw InvalidArgument("step: size mismatch");
  std::vector<double> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    next[i] = x[i] - eta * v_hat[i];
    if (!std::isfinite(next[i]))
      throw DivergenceError("non-finite parameter at index " + std::to_string(i));
  }
  return next;
}

std::vector<std::size_t> worker_batch(const TrainConfig& c, std::size_t samples,
                                      std::size_t worker, std::size_t t) {
  const std::size_t lo = worker * samples / c.workers;
  const std::size_t hi = (worker + 1) * samples / c.workers;
  const std::size_t share = c.batch_size / c.workers + (worker < c.batch_size % c.workers ? 1 : 0);
  std::vector<std::size_t> idx(share);
  const uint64_t key = splitmix64(splitmix64(c.seed ^ 0xB5ull) ^ worker) ^ splitmix64(t);
  for (std::size_t j = 0; j < share; ++j)
    idx[j] = lo + static_cast<std::size_t>(splitmix64(key + j) % (hi - lo));
  return idx;
}

GradientHistogram make_histogram(std::span<const double> values, std::size_t bins, std::size_t t) {
  GradientHistogram h;
  h.t = t;
  if (values.empty() || bins == 0) return h;
  const double n = static_cast<double>(values.size());
  h.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - h.mean) * (v - h.mean);
  h.stddev = std::sqrt(var / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.min = *lo;
  h.max = *hi;
  h.mass.assign(bins, 0.0);
  const double width = (h.max - h.min) / static_cast<double>(bins);
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - h.min) / width) : 0;
    h.mass[std::min(b, bins - 1)] += 1.0 / n;
  }
  return h;
}

ConvergenceTrace run(const Problem& problem, const TrainConfig& config) {
  validate(config, problem);
  const double lip = problem.lipschitz();

  ConvergenceTrace trace;
  trace.lipschitz = lip;
  trace.lipschitz_exact = problem.lipschitz_exact();
  std::vector<double> x = problem.initial_point();
  trace.sigma2 = problem.gradient_variance(x);
  trace.rows.reserve(config.iterations);

  const std::size_t workers = config.workers;
  const std::size_t dim = problem.parameters();

  const auto clip = [&](std::vector<double>& g) {
    if (!config.clip) return;
    for (double& v : g) v = std::clamp(v, -*config.clip, *config.clip);
  };

  QuantizerConfig quantizer = passthrough_quantizer();
  if (config.compression && config.quant_bits > 0) {
    std::vector<std::vector<double>> samples;
    for (std::size_t w = 0; w < workers; ++w) {
      auto g = problem.sub_gradient(x, worker_batch(config, problem.samples(), w, 0));
      clip(g);
      samples.push_back(std::move(g));
    }
    const SparsificationSpec spec{dropout_ratio(config, lip, 0), config.mode, Domain::kFrequency};
    quantizer = calibrate(samples, config.quant_bits, config.mantissa_bits, spec, config.chunk_size);
  }

  std::vector<double> raw(dim), recon(dim);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    TraceRow row;
    row.t = t;
    row.eta = learning_rate(config, lip, t);
    row.theta = dropout_ratio(config, lip, t);
    row.loss = problem.loss(x);
    row.grad_sq_norm = sq_norm(problem.gradient(x));

    const CodecConfig codec{{row.theta, config.mode, Domain::kFrequency}, quantizer, false,
                            config.chunk_size};
    const bool lossless = !config.compression || (row.theta == 0.0 && codec.passthrough());

    std::fill(raw.begin(), raw.end(), 0.0);
    std::fill(recon.begin(), recon.end(), 0.0);
    for (std::size_t w = 0; w < workers; ++w) {
      auto v = problem.sub_gradient(x, worker_batch(config, problem.samples(), w, t));
      clip(v);
      std::vector<double> v_hat;
      if (lossless) {
        v_hat = v;
      } else {
        const auto wire = serialize(compress(v, codec));
        v_hat = decompress(deserialize(wire));
      }
      row.err_ratio = std::max(row.err_ratio, assumption_check(v, v_hat, row.theta).error_ratio);
      for (std::size_t k = 0; k < dim; ++k) {
        raw[k] += v[k];
        recon[k] += v_hat[k];
      }
    }
    const double inv_w = 1.0 / static_cast<double>(workers);
    for (std::size_t k = 0; k < dim; ++k) {
      raw[k] *= inv_w;
      recon[k] *= inv_w;
    }

    trace.rows.push_back(row);
    if (config.histogram_interval > 0 && t % config.histogram_interval == 0)
      trace.histograms.push_back(make_histogram(raw, config.histogram_bins, t));

    if (!std::isfinite(row.loss) || row.loss > kDivergenceLoss) {
      trace.final_x = x;
      throw TrainingDiverged("loss " + std::to_string(row.loss) + " at iteration " +
                                 std::to_string(t) + " exceeds divergence threshold",
                             std::move(trace));
    }
    try {
      x = step(x, recon, row.eta);
    } catch (const DivergenceError& e) {
      trace.final_x = x;
      throw TrainingDiverged(std::string(e.what()) + " at iteration " + std::to_string(t),
                             std::move(trace));
    }
  }
  trace.final_x = std::move(x);
  return trace;
}

GradientStats gradient_stats(const ConvergenceTrace& trace) {
  if (trace.histograms.size() < 2)
    throw InvalidArgument("gradient_stats: need at least two sampled histograms");
  GradientStats s;
  for (const auto& h : trace.histograms) {
    GradientHistogram summary = h;
    summary.mass.clear();
    s.samples.push_back(std::move(summary));
  }
  s.shrinking = s.samples.back().stddev < s.samples.front().stddev;
  return s;
}

double descent_lemma_slack(double lipschitz, double eta, double theta, double sigma2,
                           std::size_t batch) {
  return (lipschitz * eta + theta * theta) * eta * sigma2 / (2.0 * static_cast<double>(batch));
}

double fixed_rate_bound(double f0, double f_last, std::size_t iterations, double lipschitz,
                        double eta, double theta, double sigma2, std::size_t batch) {
  return 4.0 * (f0 - f_last) / static_cast<double>(iterations) +
         (lipschitz * eta + theta * theta) * 2.0 * eta * sigma2 / static_cast<double>(batch);
}

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
  os << "t,loss,grad_sq_norm,theta,eta,err_ratio\n";
  os << std::setprecision(17);
  for (const auto& r : trace.rows)
    os << r.t << ',' << r.loss << ',' << r.grad_sq_norm << ',' << r.theta << ',' << r.eta << ','
       << r.err_ratio << '\n';
}

}  // namespace fgc
