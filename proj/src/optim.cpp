#include "wanco/optim.hpp"

#include "wanco/diffcore.hpp"

#include <cmath>
#include <stdexcept>

namespace wanco {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr,
               Direction direction) {
  if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw NonFiniteError("adam_step: non-finite gradient entry");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const double sign = direction == Direction::Descent ? 1.0 : -1.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = sign * grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void LrSchedule::validate() const {
  if (!(initial >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  double prev = 0.0;
  for (double m : milestones) {
    if (!(m > prev && m < 1.0)) throw std::invalid_argument("lr milestones must be strictly increasing in (0,1)");
    prev = m;
  }
}

double lr_at(const LrSchedule& schedule, long iteration, long n_iterations) {
  double lr = schedule.initial;
  for (double m : schedule.milestones) {
    if (static_cast<double>(iteration) >= m * static_cast<double>(n_iterations)) lr *= schedule.factor;
  }
  return lr;
}

}  // namespace wanco
