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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fgc/error.h"
#include "fgc/simulator.h"
#include "oracles.h"

namespace fgc {
namespace {

using testing::l2;
using testing::l2_diff;
using testing::random_vector;

ProblemSpec small(ProblemKind kind) {
  ProblemSpec s;
  s.kind = kind;
  s.samples = 64;
  s.dim = 6;
  s.hidden = 4;
  s.seed = 3;
  return s;
}

// Central differences on the loss.
std::vector<double> numeric_gradient(const Problem& p, std::vector<double> x) {
  std::vector<double> g(x.size());
  const double h = 1e-6;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = x[k];
    x[k] = orig + h;
    const double up = p.loss(x);
    x[k] = orig - h;
    const double down = p.loss(x);
    x[k] = orig;
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

TrainConfig quick(std::size_t iterations) {
  TrainConfig c;
  c.workers = 2;
  c.batch_size = 8;
  c.iterations = iterations;
  return c;
}

}  // namespace

TEST_CASE("problem gradients match finite differences") {
  std::mt19937_64 rng(1);
  for (auto kind : {ProblemKind::kQuadratic, ProblemKind::kLogistic, ProblemKind::kMlp}) {
    CAPTURE(to_string(kind));
    const Problem p(small(kind));
    for (int trial = 0; trial < 3; ++trial) {
      const auto x = random_vector(rng, p.parameters(), 0.5);
      const auto g = p.gradient(x);
      CHECK(l2_diff(g, numeric_gradient(p, x)) <= 1e-6 * std::max(1.0, l2(g)));
    }
  }
}

TEST_CASE("full gradient is the mean of example gradients") {
  std::mt19937_64 rng(2);
  for (auto kind : {ProblemKind::kQuadratic, ProblemKind::kLogistic, ProblemKind::kMlp}) {
    const Problem p(small(kind));
    const auto x = random_vector(rng, p.parameters(), 0.3);
    std::vector<std::size_t> all(p.samples());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    CHECK(l2_diff(p.sub_gradient(x, all), p.gradient(x)) <= 1e-10 * std::max(1.0, l2(p.gradient(x))));
    std::vector<double> mean(p.parameters(), 0.0);
    for (std::size_t j = 0; j < p.samples(); ++j) {
      const auto gj = p.example_gradient(x, j);
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += gj[k] / static_cast<double>(p.samples());
    }
    CHECK(l2_diff(mean, p.gradient(x)) <= 1e-10 * std::max(1.0, l2(mean)));
  }
}

TEST_CASE("lipschitz constants bound the gradient change") {
  std::mt19937_64 rng(3);
  for (auto kind : {ProblemKind::kQuadratic, ProblemKind::kLogistic}) {
    const Problem p(small(kind));
    CHECK(p.lipschitz() > 0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto x = random_vector(rng, p.parameters());
      const auto y = random_vector(rng, p.parameters());
      CHECK(l2_diff(p.gradient(x), p.gradient(y)) <= p.lipschitz() * l2_diff(x, y) * (1 + 1e-6));
    }
  }
  CHECK(Problem(small(ProblemKind::kQuadratic)).lipschitz_exact());
  CHECK_FALSE(Problem(small(ProblemKind::kLogistic)).lipschitz_exact());
  auto spec = small(ProblemKind::kMlp);
  spec.lipschitz = 7.5;
  CHECK(Problem(spec).lipschitz() == 7.5);
}

TEST_CASE("quadratic lipschitz constant is attained along the top eigenvector") {
  const Problem p(small(ProblemKind::kQuadratic));
  // the ratio |H e| / |e| approaches L for random directions only from below
  std::mt19937_64 rng(4);
  double best = 0;
  const auto zero = std::vector<double>(p.parameters(), 0.0);
  const auto g0 = p.gradient(zero);
  for (int i = 0; i < 200; ++i) {
    const auto e = random_vector(rng, p.parameters());
    best = std::max(best, l2_diff(p.gradient(e), g0) / l2(e));
  }
  CHECK(best <= p.lipschitz() * (1 + 1e-9));
  CHECK(best >= 0.5 * p.lipschitz());
}

TEST_CASE("power iteration") {
  const std::vector<double> m{2, 0, 0, 0, 5, 0, 0, 0, 1};
  CHECK(power_iteration(m, 3) == doctest::Approx(5.0).epsilon(1e-5));
  CHECK(power_iteration(std::vector<double>(4, 0.0), 2) == 0.0);
}

TEST_CASE("quadratic minimiser zeroes the gradient") {
  const Problem p(small(ProblemKind::kQuadratic));
  const auto x = p.minimizer();
  CHECK(l2(p.gradient(x)) <= 1e-10);
  CHECK(p.loss(x) <= p.loss(p.initial_point()));
  CHECK_THROWS_AS(Problem(small(ProblemKind::kLogistic)).minimizer(), InvalidArgument);
}

TEST_CASE("problem argument checks") {
  const Problem p(small(ProblemKind::kQuadratic));
  CHECK_THROWS_AS(p.loss(std::vector<double>(3)), InvalidArgument);
  CHECK_THROWS_AS(p.example_gradient(std::vector<double>(6), 64), InvalidArgument);
  CHECK_THROWS_AS(p.sub_gradient(std::vector<double>(6), std::vector<std::size_t>{}), InvalidArgument);
  auto spec = small(ProblemKind::kMlp);
  spec.hidden = 65;
  CHECK_THROWS_AS(Problem{spec}, InvalidArgument);
  spec = small(ProblemKind::kQuadratic);
  spec.samples = 0;
  CHECK_THROWS_AS(Problem{spec}, InvalidArgument);
  CHECK(parse_problem_kind("logistic") == ProblemKind::kLogistic);
  CHECK_THROWS_AS(parse_problem_kind("cnn"), InvalidArgument);
}

TEST_CASE("gradient variance matches its definition") {
  const Problem p(small(ProblemKind::kLogistic));
  const auto x = p.initial_point();
  const auto full = p.gradient(x);
  double total = 0;
  for (std::size_t j = 0; j < p.samples(); ++j) {
    const double d = l2_diff(p.example_gradient(x, j), full);
    total += d * d;
  }
  CHECK(p.gradient_variance(x) == doctest::Approx(total / p.samples()));
}

TEST_CASE("worker batches stay inside their partition and are reproducible") {
  TrainConfig c;
  c.workers = 3;
  c.batch_size = 10;
  std::size_t total = 0;
  for (std::size_t w = 0; w < 3; ++w) {
    const auto idx = worker_batch(c, 100, w, 17);
    total += idx.size();
    for (auto j : idx) {
      CHECK(j >= w * 100 / 3);
      CHECK(j < (w + 1) * 100 / 3);
    }
    CHECK(idx == worker_batch(c, 100, w, 17));
  }
  CHECK(total == 10);
  CHECK(worker_batch(c, 100, 0, 1) != worker_batch(c, 100, 0, 2));
  const auto seeded_once = worker_batch(c, 100, 0, 17);
  c.seed = 2;
  CHECK(worker_batch(c, 100, 0, 17) != seeded_once);
}

TEST_CASE("schedules") {
  TrainConfig c;
  c.eta0 = 0.1;
  CHECK(learning_rate(c, 2.0, 500) == 0.1);
  c.eta0 = 0.0;
  CHECK(learning_rate(c, 2.0, 0) == doctest::Approx(1.0 / 8.0));
  c.eta0 = 0.1;
  c.lr_schedule = LrSchedule::kDiminishing;
  c.lr_decay = 100;
  CHECK(learning_rate(c, 2.0, 100) == doctest::Approx(0.05));

  c.theta_schedule = ThetaSchedule::kStepwise;
  c.theta = 0.9;
  c.theta_after = 0.0;
  c.switch_iteration = 10;
  CHECK(dropout_ratio(c, 2.0, 9) == 0.9);
  CHECK(dropout_ratio(c, 2.0, 10) == 0.0);

  c.theta_schedule = ThetaSchedule::kDiminishing;
  CHECK(dropout_ratio(c, 2.0, 0) == doctest::Approx(std::sqrt(0.2)));
  CHECK(dropout_ratio(c, 200.0, 0) == doctest::Approx(0.99));

  c.theta_schedule = ThetaSchedule::kPolynomial;
  c.theta = 0.8;
  c.theta_decay = 10;
  c.theta_power = 1.0;
  CHECK(dropout_ratio(c, 2.0, 30) == doctest::Approx(0.2));

  CHECK(parse_theta_schedule("stepwise") == ThetaSchedule::kStepwise);
  CHECK(to_string(LrSchedule::kDiminishing) == "diminishing");
  CHECK_THROWS_AS(parse_lr_schedule("cosine"), InvalidArgument);
}

TEST_CASE("training config validation") {
  const Problem p(small(ProblemKind::kQuadratic));
  auto c = quick(10);
  CHECK_NOTHROW(validate(c, p));
  c.workers = 0;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c = quick(10);
  c.batch_size = 1;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c = quick(10);
  c.theta = 1.5;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c = quick(10);
  c.quant_bits = 1;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c = quick(0);
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);

  c = quick(10);
  c.check_hypotheses = true;
  c.eta0 = 1.0 / p.lipschitz();
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c.eta0 = 0.0;
  c.theta = 0.6;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c.theta = 0.5;
  CHECK_NOTHROW(validate(c, p));
  c.lr_schedule = LrSchedule::kDiminishing;
  c.lr_power = 0.4;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
}

TEST_CASE("uncompressed SGD descends and is reproducible") {
  const Problem p(small(ProblemKind::kQuadratic));
  auto c = quick(400);
  c.compression = false;
  const auto a = run(p, c);
  REQUIRE(a.rows.size() == 400);
  CHECK(a.rows.back().loss < 0.2 * a.rows.front().loss);
  CHECK(a.sigma2 > 0);
  CHECK(a.lipschitz == p.lipschitz());
  const auto b = run(p, c);
  CHECK(a.final_x == b.final_x);
  for (const auto& r : a.rows) CHECK(r.err_ratio == 0.0);
}

TEST_CASE("lossless codec settings match the uncompressed run exactly") {
  const Problem p(small(ProblemKind::kLogistic));
  auto c = quick(100);
  c.compression = false;
  const auto plain = run(p, c);
  c.compression = true;
  c.theta = 0.0;
  CHECK(run(p, c).final_x == plain.final_x);
}

TEST_CASE("energy-mode compression respects the per-worker error bound") {
  const Problem p(small(ProblemKind::kQuadratic));
  auto c = quick(200);
  c.mode = DropMode::kEnergy;
  c.theta = 0.5;
  const auto trace = run(p, c);
  for (const auto& r : trace.rows) CHECK(r.err_ratio <= 0.5 + 1e-6);
}

TEST_CASE("quantized compression still makes progress") {
  ProblemSpec spec;
  spec.samples = 256;
  spec.dim = 40;
  const Problem p(spec);
  auto c = quick(1000);
  c.workers = 4;
  c.theta = 0.3;
  c.quant_bits = 8;
  c.chunk_size = 16;
  const auto trace = run(p, c);
  CHECK(trace.rows.back().loss < 0.2 * trace.rows.front().loss);
  CHECK(trace.rows[0].err_ratio > 0);
}

TEST_CASE("all three problems train") {
  for (auto kind : {ProblemKind::kLogistic, ProblemKind::kMlp}) {
    const Problem p(small(kind));
    auto c = quick(300);
    c.theta = 0.3;
    const auto trace = run(p, c);
    CHECK(trace.rows.back().loss < trace.rows.front().loss);
  }
}

TEST_CASE("fixed-rate bound holds for plain SGD") {
  const Problem p(small(ProblemKind::kQuadratic));
  auto c = quick(2000);
  c.compression = false;
  const auto trace = run(p, c);
  double best = trace.rows.front().grad_sq_norm;
  for (const auto& r : trace.rows) best = std::min(best, r.grad_sq_norm);
  const double eta = learning_rate(c, p.lipschitz(), 0);
  const double bound = fixed_rate_bound(trace.rows.front().loss, p.loss(p.minimizer()), c.iterations,
                                        p.lipschitz(), eta, 0.0, trace.sigma2, c.batch_size);
  CHECK(best <= bound);
  CHECK(descent_lemma_slack(2.0, 0.1, 0.5, 3.0, 4) == doctest::Approx((0.2 + 0.25) * 0.1 * 3.0 / 8));
  CHECK(fixed_rate_bound(1.0, 0.5, 10, 2.0, 0.1, 0.5, 3.0, 4) ==
        doctest::Approx(0.2 + 0.45 * 0.2 * 3.0 / 4));
}

TEST_CASE("divergence aborts with the partial trace") {
  const Problem p(small(ProblemKind::kQuadratic));
  auto c = quick(500);
  c.compression = false;
  c.eta0 = 10.0 / p.lipschitz();
  try {
    (void)run(p, c);
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK_FALSE(e.partial().rows.empty());
    CHECK(e.partial().rows.size() < 500);
    CHECK_FALSE(e.partial().final_x.empty());
  }
  CHECK_THROWS_AS(step(std::vector<double>{1e308}, std::vector<double>{-1e308}, 10.0), DivergenceError);
}

TEST_CASE("gradient histograms") {
  const auto h = make_histogram(std::vector<double>{0, 1, 2, 3}, 2, 5);
  CHECK(h.t == 5);
  CHECK(h.mean == 1.5);
  CHECK(h.min == 0);
  CHECK(h.max == 3);
  CHECK(h.mass == std::vector<double>{0.5, 0.5});

  const Problem p(small(ProblemKind::kQuadratic));
  auto c = quick(500);
  c.histogram_interval = 100;
  const auto trace = run(p, c);
  CHECK(trace.histograms.size() == 5);
  const auto stats = gradient_stats(trace);
  CHECK(stats.samples.size() == 5);
  CHECK(stats.shrinking);
  ConvergenceTrace empty;
  CHECK_THROWS_AS(gradient_stats(empty), InvalidArgument);
}

TEST_CASE("trace csv") {
  const Problem p(small(ProblemKind::kQuadratic));
  const auto trace = run(p, quick(3));
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,loss,grad_sq_norm,theta,eta,err_ratio");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}

}  // namespace fgc
