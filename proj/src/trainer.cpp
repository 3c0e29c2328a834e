#include "wanco/trainer.hpp"

#include "wanco/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace wanco {

namespace {

constexpr std::uint64_t kBatchTag = 0xba7c4;
constexpr std::uint64_t kBoundaryTag = 0xb0a7d;

HistoryRecord make_record(const Evaluation& eval, long t, std::span<const double> betas, double lr_p, double lr_a) {
  HistoryRecord rec;
  rec.iteration = t;
  rec.loss = eval.loss;
  rec.objective = eval.objective;
  for (const auto& c : eval.constraints) {
    rec.achieved.push_back(c.achieved);
    rec.residual.push_back(c.residual());
    rec.relative.push_back(relative_constraint_error(c.achieved, c.target).value);
  }
  rec.multipliers = eval.multipliers;
  rec.betas.assign(betas.begin(), betas.end());
  rec.lr_primal = lr_p;
  rec.lr_adversarial = lr_a;
  return rec;
}

}  // namespace

void TrainConfig::validate(const Problem& problem) const {
  if (iterations < 1) throw std::invalid_argument("train.iterations must be >= 1");
  if (record_every < 1) throw std::invalid_argument("train.record_every must be >= 1");
  if (!(lr_primal >= 0.0)) throw std::invalid_argument("train.lr_primal must be >= 0");
  if (!(lr_adversarial >= 0.0)) throw std::invalid_argument("train.lr_adversarial must be >= 0");
  LrSchedule{lr_primal, milestones}.validate();
  const auto& slots = problem.networks();
  if (slots.empty() || slots[0].adversarial) throw std::invalid_argument("train: the first network must be the primal one");
  for (std::size_t k = 1; k < slots.size(); ++k) {
    if (!slots[k].adversarial) throw std::invalid_argument("train: only one primal network is supported");
  }
  if (inner_steps.size() != slots.size()) {
    throw std::invalid_argument("train.inner_steps: expected one entry per network");
  }
  for (std::size_t k = 0; k < inner_steps.size(); ++k) {
    if (inner_steps[k] < 1) {
      throw std::invalid_argument("train.inner_steps." + problem.networks()[k].name + " must be >= 1");
    }
  }
  const auto channels = problem.channels();
  if (schedules.size() != channels.size()) throw std::invalid_argument("train: expected one beta schedule per channel");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (!(schedules[c].alpha >= 1.0)) throw std::invalid_argument("train.alpha." + channels[c].name + " must be >= 1");
    if (channels[c].penalized && !(schedules[c].beta0 > 0.0)) {
      throw std::invalid_argument("train.beta0." + channels[c].name + " must be > 0");
    }
  }
}

double beta_at(const ChannelSchedule& schedule, const ConstraintChannel& channel, long iteration) {
  if (!channel.penalized) return 0.0;
  if (!channel.amplified) return schedule.beta0;
  return schedule.beta0 * std::pow(schedule.alpha, static_cast<double>(iteration));
}

RelativeError relative_constraint_error(double achieved, double target) {
  if (target == 0.0) return {achieved - target, true};
  return {(target - achieved) / target, false};
}

Batches make_batches(const Problem& problem, const SamplerConfig& sampler, std::uint64_t seed, long iteration) {
  const Box box = problem.domain();
  const CounterRng root(seed);
  Batches batches;
  if (sampler.kind == SamplerKind::Hammersley) {
    batches.interior = hammersley(sampler.n_interior, box.dim(), box);
  } else {
    const auto key = root.derive(kBatchTag).derive(static_cast<std::uint64_t>(iteration)).key();
    batches.interior = sample_uniform(box, sampler.n_interior, key);
  }
  if (problem.uses_boundary()) {
    const auto key = root.derive(kBoundaryTag).derive(static_cast<std::uint64_t>(iteration)).key();
    batches.boundary = sample_boundary_box(box, sampler.n_per_face, key);
  }
  return batches;
}

TrainResult train(const Problem& problem, const TrainConfig& config, const SamplerConfig& sampler,
                  const RecordCallback& on_record) {
  return train_from(problem, problem.make_params(config.seed), config, sampler, on_record);
}

TrainResult train_from(const Problem& problem, ParamStore params, const TrainConfig& config,
                       const SamplerConfig& sampler, const RecordCallback& on_record) {
  config.validate(problem);
  const auto& slots = problem.networks();
  const auto channels = problem.channels();
  const std::size_t n_nets = slots.size();
  const long N = config.iterations;
  const LrSchedule sched_p{config.lr_primal, config.milestones};
  const LrSchedule sched_a{config.lr_adversarial, config.milestones};

  TrainResult result;
  RunHistory& history = result.history;
  for (const auto& ch : channels) {
    history.channel_names.push_back(ch.name);
    for (const auto& comp : ch.components) history.constraint_names.push_back(comp);
  }
  history.multiplier_names = problem.multiplier_labels();

  std::vector<AdamState> adam;
  for (const auto& slot : slots) adam.emplace_back(slot.param_count());
  AdjointAccumulator adjoint(params.size());
  GradMask primal_mask(n_nets, false);
  primal_mask[0] = true;

  std::vector<double> betas(channels.size());
  auto set_betas = [&](long t) {
    for (std::size_t c = 0; c < channels.size(); ++c) betas[c] = beta_at(config.schedules[c], channels[c], t);
  };
  auto record = [&](const Evaluation& eval, long t) {
    history.records.push_back(
        make_record(eval, t, betas, lr_at(sched_p, t, N), lr_at(sched_a, t, N)));
    if (on_record) on_record(history.records.back());
  };
  auto fail = [](long t, const NonFiniteError& e) {
    return NonFiniteError("iteration " + std::to_string(t) + ": " + e.what());
  };

  for (long t = 0; t < N; ++t) {
    set_betas(t);
    const Batches batches = make_batches(problem, sampler, config.seed, t);
    const double lr_p = lr_at(sched_p, t, N);
    const double lr_a = lr_at(sched_a, t, N);
    try {
      const int n_u = config.inner_steps[0];
      for (int s = 0; s < n_u; ++s) {
        adjoint.clear();
        const Evaluation eval = problem.evaluate(params, batches, betas, primal_mask, &adjoint);
        if (s == 0 && t % config.record_every == 0) record(eval, t);
        const auto g = adjoint.range(slots[0].offset, slots[0].param_count());
        adam_step(adam[0], slots[0].params(params), g, lr_p, Direction::Descent);
      }
      for (std::size_t k = 1; k < n_nets; ++k) {
        GradMask mask(n_nets, false);
        mask[k] = true;
        for (int s = 0; s < config.inner_steps[k]; ++s) {
          adjoint.clear();
          problem.evaluate(params, batches, betas, mask, &adjoint);
          const auto g = adjoint.range(slots[k].offset, slots[k].param_count());
          adam_step(adam[k], slots[k].params(params), g, lr_a, Direction::Ascent);
        }
      }
    } catch (const NonFiniteError& e) {
      throw fail(t, e);
    }
  }

  set_betas(N);
  try {
    const Batches batches = make_batches(problem, sampler, config.seed, N);
    result.final_eval = problem.evaluate(params, batches, betas, GradMask(n_nets, false), nullptr);
  } catch (const NonFiniteError& e) {
    throw fail(N, e);
  }
  if (N % config.record_every == 0) record(result.final_eval, N);
  for (const auto& c : result.final_eval.constraints) history.absolute_error.push_back(c.target == 0.0);
  result.final_betas = betas;
  params.check_invariants();
  result.params = std::move(params);
  return result;
}

}  // namespace wanco
