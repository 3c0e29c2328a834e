#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wanco {

enum class Direction { Descent, Ascent };

/// Adam moments for one network's parameter range.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update. Ascent is descent on the negated gradient.
/// Throws NonFiniteError on a non-finite gradient entry.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr,
               Direction direction);

/// Step decay: initial * factor^(milestones passed). Milestones are fractions of N.
struct LrSchedule {
  double initial = 0.016;
  std::vector<double> milestones{0.5, 0.75, 0.9};
  double factor = 0.5;

  void validate() const;
};

double lr_at(const LrSchedule& schedule, long iteration, long n_iterations);

}  // namespace wanco
