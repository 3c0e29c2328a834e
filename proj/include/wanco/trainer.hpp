#pragma once

#include "wanco/optim.hpp"
#include "wanco/problem.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace wanco {

/// beta0 and amplifier for one constraint channel.
struct ChannelSchedule {
  double beta0 = 1000.0;
  double alpha = 1.0003;
};

enum class SamplerKind { Uniform, Hammersley };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::Uniform;
  std::size_t n_interior = 4096;
  std::size_t n_per_face = 256;  // boundary points per box face, when the problem uses them
};

struct TrainConfig {
  long iterations = 1000;
  long record_every = 50;
  double lr_primal = 0.016;
  double lr_adversarial = 0.016;
  std::vector<double> milestones{0.5, 0.75, 0.9};
  std::vector<int> inner_steps;            // one per network, indexed like Problem::networks()
  std::vector<ChannelSchedule> schedules;  // one per constraint channel
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate(const Problem& problem) const;
};

/// beta0 * alpha^t for a penalized, amplified channel; unamplified channels
/// stay at beta0 and unpenalized ones are 0.
double beta_at(const ChannelSchedule& schedule, const ConstraintChannel& channel, long iteration);

struct RelativeError {
  double value = 0.0;
  bool absolute = false;  // target was 0: value is the plain residual
};

/// (target - achieved) / target, or achieved - target when target == 0.
RelativeError relative_constraint_error(double achieved, double target);

struct HistoryRecord {
  long iteration = 0;
  double loss = 0.0;
  double objective = 0.0;
  std::vector<double> achieved;
  std::vector<double> residual;
  std::vector<double> relative;
  std::vector<double> multipliers;
  std::vector<double> betas;
  double lr_primal = 0.0;
  double lr_adversarial = 0.0;
};

struct RunHistory {
  std::vector<std::string> constraint_names;
  std::vector<bool> absolute_error;  // per constraint: relative error fell back to the residual
  std::vector<std::string> multiplier_names;
  std::vector<std::string> channel_names;
  std::vector<HistoryRecord> records;
};

struct TrainResult {
  ParamStore params;
  RunHistory history;
  Evaluation final_eval;  // after N iterations on batch N
  std::vector<double> final_betas;
};

using RecordCallback = std::function<void(const HistoryRecord&)>;

/// Batches for outer iteration t. Uniform batches are fresh per iteration;
/// Hammersley interior points are the same every iteration.
Batches make_batches(const Problem& problem, const SamplerConfig& sampler, std::uint64_t seed, long iteration);

/// Alternating adversarial augmented-Lagrangian training. Each outer iteration
/// draws a batch, takes the primal descent steps, then the ascent steps of
/// each adversarial network in order, then amplifies beta. Records are taken
/// after 0, record_every, 2*record_every, ... <= N completed iterations.
/// networks()[0] is the primal network; the rest are adversarial. Throws NonFiniteError (with the iteration) on a non-finite loss.
TrainResult train(const Problem& problem, const TrainConfig& config, const SamplerConfig& sampler,
                  const RecordCallback& on_record = {});

/// Same as train() but starting from the given parameters.
TrainResult train_from(const Problem& problem, ParamStore params, const TrainConfig& config,
                       const SamplerConfig& sampler, const RecordCallback& on_record = {});

}  // namespace wanco
