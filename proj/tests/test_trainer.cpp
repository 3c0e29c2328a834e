#include <doctest.h>

#include "wanco/parallel.hpp"
#include "wanco/problems.hpp"
#include "wanco/trainer.hpp"

#include <cmath>
#include <limits>

using namespace wanco;

namespace {

TrainConfig small_config(const Problem& p, long n) {
  TrainConfig cfg;
  cfg.iterations = n;
  cfg.record_every = 50;
  cfg.seed = 3;
  cfg.inner_steps.assign(p.networks().size(), 1);
  cfg.schedules.assign(p.channels().size(), ChannelSchedule{10000.0, 1.0003});
  return cfg;
}

SamplerConfig small_sampler() {
  SamplerConfig s;
  s.n_interior = 256;
  s.n_per_face = 16;
  return s;
}

const NetShape kNet{1, 6, Activation::Tanh3};
const MultiplierShape kMul{4, Activation::Tanh3};

}  // namespace

TEST_CASE("relative constraint error") {
  CHECK(relative_constraint_error(-1.0, -0.5).value == doctest::Approx(-1.0));
  CHECK(relative_constraint_error(-0.5, -0.5).value == 0.0);
  CHECK(relative_constraint_error(0.0, -0.5).value == doctest::Approx(1.0));
  const auto abs = relative_constraint_error(0.3, 0.0);
  CHECK(abs.absolute);
  CHECK(abs.value == doctest::Approx(0.3));
}

TEST_CASE("beta follows beta0 * alpha^t") {
  const ConstraintChannel plain{"c", {"c"}};
  CHECK(beta_at({10000.0, 1.0003}, plain, 5000) == doctest::Approx(44806.81).epsilon(1e-6));
  ConstraintChannel fixed = plain;
  fixed.amplified = false;
  CHECK(beta_at({1000.0, 1.0003}, fixed, 200) == 1000.0);
  ConstraintChannel off = plain;
  off.penalized = false;
  CHECK(beta_at({1000.0, 1.0003}, off, 200) == 0.0);
}

TEST_CASE("record count and final beta") {
  const GlProblem p(GlSpec{}, kNet, kMul);
  for (long n : {100L, 120L}) {
    const TrainResult r = train(p, small_config(p, n), small_sampler());
    CHECK(r.history.records.size() == static_cast<std::size_t>(n / 50 + 1));
    CHECK(r.final_betas[0] == doctest::Approx(10000.0 * std::pow(1.0003, n)).epsilon(1e-12));
    double prev = 0.0;
    for (const auto& rec : r.history.records) {
      CHECK(rec.betas[0] > prev);
      prev = rec.betas[0];
    }
  }
}

TEST_CASE("identical seeds give identical histories regardless of worker count") {
  const FluidSolidProblem p(FluidSolidSpec{}, kNet, kNet, kMul, kNet);
  TrainConfig cfg = small_config(p, 6);
  cfg.record_every = 2;
  SamplerConfig sampler = small_sampler();
  sampler.n_interior = 1500;  // several chunks
  set_worker_count(1);
  const TrainResult a = train(p, cfg, sampler);
  set_worker_count(3);
  const TrainResult b = train(p, cfg, sampler);
  set_worker_count(0);
  REQUIRE(a.history.records.size() == b.history.records.size());
  for (std::size_t i = 0; i < a.history.records.size(); ++i) {
    CHECK(a.history.records[i].loss == b.history.records[i].loss);
    CHECK(a.history.records[i].multipliers == b.history.records[i].multipliers);
  }
  CHECK(std::equal(a.params.values().begin(), a.params.values().end(), b.params.values().begin()));
}

TEST_CASE("frozen zero multiplier without penalty is plain descent on the objective") {
  GlSpec spec;
  spec.method = GlMethod::LagrangeOnly;
  const GlProblem p(spec, kNet, kMul);
  ParamStore start = p.make_params(5);
  const auto& lam = p.networks()[1];
  auto lp = lam.params(start);
  std::fill(lp.begin() + 2 * kMul.width, lp.end(), 0.0);  // W_out and b_out

  TrainConfig cfg = small_config(p, 20);
  cfg.record_every = 1;
  cfg.lr_adversarial = 0.0;
  const SamplerConfig sampler = small_sampler();
  const TrainResult r = train_from(p, start, cfg, sampler);

  // Reference: Adam on the primal net alone against C0 * L.
  ParamStore ref = start;
  AdamState adam(p.networks()[0].param_count());
  const GradMask primal{true, false};
  for (long t = 0; t < cfg.iterations; ++t) {
    const Batches b = make_batches(p, sampler, cfg.seed, t);
    AdjointAccumulator acc(ref.size());
    const Evaluation e = p.evaluate(ref, b, std::vector<double>{0.0}, primal, &acc);
    CHECK(e.loss == e.objective);
    CHECK(r.history.records[static_cast<std::size_t>(t)].objective == e.objective);
    adam_step(adam, p.networks()[0].params(ref), acc.range(0, p.networks()[0].param_count()),
              lr_at(LrSchedule{cfg.lr_primal, cfg.milestones}, t, cfg.iterations),
              Direction::Descent);
  }
  for (const auto& rec : r.history.records) CHECK(rec.multipliers[0] == 0.0);
}

TEST_CASE("non-finite loss aborts with the iteration") {
  const GlProblem p(GlSpec{}, kNet, kMul);
  ParamStore s = p.make_params(1);
  s.values()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train_from(p, s, small_config(p, 5), small_sampler());
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  const GlProblem p(GlSpec{}, kNet, kMul);
  TrainConfig cfg = small_config(p, 10);
  cfg.inner_steps[1] = 0;
  CHECK_THROWS_AS(cfg.validate(p), std::invalid_argument);
  cfg = small_config(p, 10);
  cfg.schedules[0].alpha = 0.9;
  CHECK_THROWS_AS(cfg.validate(p), std::invalid_argument);
  cfg = small_config(p, 10);
  cfg.schedules[0].beta0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(p), std::invalid_argument);
}
