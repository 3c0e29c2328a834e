#pragma once

#include "wanco/problem.hpp"

#include <cmath>
#include <string>

namespace wanco::detail {

/// Sums the terms into eval.loss; throws NonFiniteError listing the breakdown
/// if any term is not finite.
inline void finalize_terms(std::string_view family, Evaluation& eval) {
  double total = 0.0;
  bool finite = true;
  for (const auto& t : eval.terms) {
    total += t.value;
    finite = finite && std::isfinite(t.value);
  }
  if (!finite || !std::isfinite(total)) {
    std::string msg = std::string(family) + " loss is not finite:";
    for (const auto& t : eval.terms) msg += " " + t.name + "=" + std::to_string(t.value);
    throw NonFiniteError(msg);
  }
  eval.loss = total;
}

inline bool wanted(const GradMask& want, std::size_t k) { return k < want.size() && want[k]; }

inline std::span<double> grad_of(AdjointAccumulator* adjoint, const NetworkSlot& slot) {
  if (adjoint == nullptr) throw std::invalid_argument("gradient requested without an accumulator");
  return adjoint->range(slot.offset, slot.param_count());
}

}  // namespace wanco::detail
