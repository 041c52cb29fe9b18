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

#ifndef FGC_SIMULATOR_H_
#define FGC_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgc/codec.h"
#include "fgc/error.h"
#include "fgc/spectral.h"

namespace fgc {

// Desk-scale bulk-synchronous SGD. W logical workers each own a contiguous
// partition of the dataset, compute a mini-batch gradient on their share of
// the global batch, push it through the codec, and the reconstructions are
// averaged in worker order before the update x <- x - eta * v_hat.

enum class ProblemKind : uint8_t { kQuadratic, kLogistic, kMlp };

ProblemKind parse_problem_kind(std::string_view name);
std::string_view to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kQuadratic;
  std::size_t samples = 512;
  std::size_t dim = 50;       // feature count
  std::size_t hidden = 16;    // MLP only, at most 64
  double noise = 0.1;         // label noise stddev
  double l2 = 1e-3;           // logistic/MLP ridge term
  uint64_t seed = 1;
  // Upper estimate of the gradient Lipschitz constant for problems where it
  // is not computed exactly (MLP). Overrides the computed bound when set.
  std::optional<double> lipschitz;
};

// f(x) = (1/N) sum_i f_i(x) over a synthetic dataset.
//   quadratic: f_i = (a_i . x - y_i)^2 / 2, L = lambda_max(A^T A) / N
//   logistic:  f_i = log(1 + exp(-s_i a_i . x)) + l2/2 |x|^2
//   mlp:       f_i = (w2 . tanh(W1 a_i + b1) + b2 - y_i)^2 / 2 + l2/2 |x|^2
class Problem {
 public:
  explicit Problem(const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }
  std::size_t samples() const { return spec_.samples; }
  std::size_t parameters() const { return parameters_; }
  double lipschitz() const { return lipschitz_; }
  bool lipschitz_exact() const { return lipschitz_exact_; }

  std::vector<double> initial_point() const;

  double loss(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
  // Gradient of f_j alone.
  std::vector<double> example_gradient(std::span<const double> x, std::size_t j) const;
  // Mean of the example gradients over `batch`. Throws on an empty batch or
  // an out-of-range index.
  std::vector<double> sub_gradient(std::span<const double> x,
                                   std::span<const std::size_t> batch) const;

  // E_j |grad f_j(x) - grad f(x)|^2 over the full dataset.
  double gradient_variance(std::span<const double> x) const;

  // Quadratic only: closed-form minimiser via the normal equations.
  std::vector<double> minimizer() const;

 private:
  void add_example_gradient(std::span<const double> x, std::size_t j, double scale,
                            std::span<double> out) const;

  ProblemSpec spec_;
  std::size_t parameters_ = 0;
  std::vector<double> features_;  // samples x dim, row-major
  std::vector<double> targets_;   // y_i, or s_i in {-1, +1}
  std::vector<double> hessian_;   // quadratic: A^T A / N
  std::vector<double> linear_;    // quadratic: A^T y / N
  double offset_ = 0.0;           // quadratic: |y|^2 / 2N
  double lipschitz_ = 0.0;
  bool lipschitz_exact_ = false;
};

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(std::span<const double> matrix, std::size_t dim,
                       double tolerance = 1e-6, int max_iterations = 100000);

enum class LrSchedule : uint8_t { kFixed, kDiminishing };
enum class ThetaSchedule : uint8_t { kFixed, kStepwise, kDiminishing, kPolynomial };

LrSchedule parse_lr_schedule(std::string_view name);
ThetaSchedule parse_theta_schedule(std::string_view name);
std::string_view to_string(LrSchedule s);
std::string_view to_string(ThetaSchedule s);

struct TrainConfig {
  std::size_t workers = 1;
  std::size_t batch_size = 8;  // global batch, split across workers
  std::size_t iterations = 1000;
  uint64_t seed = 1;

  // eta_t = eta0 for kFixed, eta0 / (1 + t / lr_decay)^lr_power otherwise.
  // eta0 <= 0 means 1 / (4L).
  LrSchedule lr_schedule = LrSchedule::kFixed;
  double eta0 = 0.0;
  double lr_decay = 1.0;
  double lr_power = 1.0;

  // kFixed:       theta
  // kStepwise:    theta until switch_iteration, theta_after afterwards
  // kDiminishing: min(theta_cap, sqrt(L * eta_t))
  // kPolynomial:  theta / (1 + t / theta_decay)^theta_power
  ThetaSchedule theta_schedule = ThetaSchedule::kFixed;
  double theta = 0.0;
  double theta_after = 0.0;
  std::size_t switch_iteration = 0;
  double theta_cap = 0.99;
  double theta_decay = 100.0;
  double theta_power = 0.5;

  DropMode mode = DropMode::kCount;
  bool compression = true;
  // 0 selects the float32 passthrough; otherwise the quantizer is calibrated
  // from the workers' gradients at t = 0.
  int quant_bits = 0;
  int mantissa_bits = kDefaultMantissa;
  std::size_t chunk_size = kDefaultChunkSize;
  std::optional<double> clip;  // clip gradient entries to [-c, c] before compression

  // Enforce the one-step descent lemma's hypotheses (eta <= 1/(4L),
  // theta^2 <= 1/4) for fixed schedules and summability for diminishing ones.
  bool check_hypotheses = false;

  std::size_t histogram_interval = 0;  // 0 disables histograms
  std::size_t histogram_bins = 32;
};

double learning_rate(const TrainConfig& config, double lipschitz, std::size_t t);
double dropout_ratio(const TrainConfig& config, double lipschitz, std::size_t t);

// Throws InvalidArgument when the config is unusable for this problem.
void validate(const TrainConfig& config, const Problem& problem);

struct TraceRow {
  std::size_t t = 0;
  double loss = 0.0;
  double grad_sq_norm = 0.0;
  double theta = 0.0;
  double eta = 0.0;
  double err_ratio = 0.0;  // max over workers of |v_w - v_hat_w| / |v_w|
};

struct GradientHistogram {
  std::size_t t = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> mass;  // normalised bin masses over [min, max]
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  std::vector<GradientHistogram> histograms;
  double lipschitz = 0.0;
  bool lipschitz_exact = false;
  double sigma2 = 0.0;  // gradient variance estimated once, at x0
  std::vector<double> final_x;
};

// Abort carrying everything recorded before the failure.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, ConvergenceTrace partial)
      : DivergenceError(what), partial_(std::move(partial)) {}
  const ConvergenceTrace& partial() const { return partial_; }

 private:
  ConvergenceTrace partial_;
};

inline constexpr double kDivergenceLoss = 1e12;

// x - eta * v_hat; throws DivergenceError on a non-finite result.
std::vector<double> step(std::span<const double> x, std::span<const double> v_hat, double eta);

// Indices worker `w` draws at iteration t (uniform with replacement from its
// own partition; counter-based, so independent of evaluation order).
std::vector<std::size_t> worker_batch(const TrainConfig& config, std::size_t samples,
                                      std::size_t worker, std::size_t t);

ConvergenceTrace run(const Problem& problem, const TrainConfig& config);

GradientHistogram make_histogram(std::span<const double> values, std::size_t bins,
                                 std::size_t t);

struct GradientStats {
  std::vector<GradientHistogram> samples;  // mass left empty
  bool shrinking = false;  // stddev of the last sample < stddev of the first
};

GradientStats gradient_stats(const ConvergenceTrace& trace);

// Per-step slack in the one-step descent lemma: (L eta + theta^2) eta sigma^2 / (2b).
double descent_lemma_slack(double lipschitz, double eta, double theta, double sigma2,
                           std::size_t batch);

// Fixed-rate bound on min_t E|grad f(x^t)|^2 after K steps.
double fixed_rate_bound(double f0, double f_last, std::size_t iterations, double lipschitz,
                        double eta, double theta, double sigma2, std::size_t batch);

// CSV columns: t,loss,grad_sq_norm,theta,eta,err_ratio
void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace);

}  // namespace fgc

#endif  // FGC_SIMULATOR_H_
