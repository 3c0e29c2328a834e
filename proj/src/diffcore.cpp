#include "wanco/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wanco {

std::size_t ParamStore::append(std::string name, std::size_t length) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter segment '" + name + "'");
  const std::size_t offset = values_.size();
  values_.resize(offset + length, 0.0);
  segments_.push_back({std::move(name), offset, length});
  return offset;
}

std::span<double> ParamStore::range(std::size_t offset, std::size_t length) {
  if (offset + length > values_.size()) throw std::out_of_range("parameter range exceeds store");
  return std::span<double>(values_).subspan(offset, length);
}

std::span<const double> ParamStore::range(std::size_t offset, std::size_t length) const {
  if (offset + length > values_.size()) throw std::out_of_range("parameter range exceeds store");
  return std::span<const double>(values_).subspan(offset, length);
}

const Segment* ParamStore::find(std::string_view name) const {
  auto it = std::find_if(segments_.begin(), segments_.end(),
                         [&](const Segment& s) { return s.name == name; });
  return it == segments_.end() ? nullptr : &*it;
}

const Segment& ParamStore::segment_at(std::size_t i) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), i,
                             [](std::size_t idx, const Segment& s) { return idx < s.offset; });
  if (it == segments_.begin() || i >= values_.size()) throw std::out_of_range("index outside parameter store");
  return *std::prev(it);
}

void ParamStore::check_invariants() const {
  std::size_t expected = 0;
  for (const auto& s : segments_) {
    if (s.offset != expected) throw std::logic_error("segment '" + s.name + "' does not follow its predecessor");
    expected += s.length;
  }
  if (expected != values_.size()) throw std::logic_error("segments do not cover the parameter vector");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NonFiniteError("non-finite parameter in segment '" + segment_at(i).name + "'");
    }
  }
}

BatchJet BatchJet::zeros_like(const BatchJet& other) {
  BatchJet out;
  out.value = Matrix::Zero(other.value.rows(), other.value.cols());
  out.jacobian.reserve(other.jacobian.size());
  for (const auto& j : other.jacobian) out.jacobian.push_back(Matrix::Zero(j.rows(), j.cols()));
  return out;
}

BatchJet BatchJet::columns(Eigen::Index begin, Eigen::Index count) const {
  BatchJet out;
  out.value = value.middleCols(begin, count);
  out.jacobian.reserve(jacobian.size());
  for (const auto& j : jacobian) out.jacobian.push_back(j.middleCols(begin, count));
  return out;
}

void AdjointAccumulator::add(std::size_t offset, std::span<const double> g) {
  if (offset + g.size() > grad_.size()) throw std::out_of_range("adjoint range exceeds accumulator");
  for (std::size_t i = 0; i < g.size(); ++i) grad_[offset + i] += g[i];
}

void AdjointAccumulator::clear() { std::fill(grad_.begin(), grad_.end(), 0.0); }

AdjointAccumulator backprop_loss(const LossFunction& loss, const ParamStore& params) {
  AdjointAccumulator acc(params.size());
  const double value = loss(params, &acc);
  if (!std::isfinite(value)) throw NonFiniteError("loss value is not finite");
  const auto g = acc.grad();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw NonFiniteError("non-finite gradient in segment '" + params.segment_at(i).name + "'");
    }
  }
  return acc;
}

std::vector<double> finite_diff_grad(const LossValue& loss, const ParamStore& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  ParamStore probe = params;
  auto values = probe.values();
  std::vector<double> grad(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double p = values[i];
    const double step = h * std::max(1.0, std::abs(p));
    values[i] = p + step;
    const double up = loss(probe);
    values[i] = p - step;
    const double down = loss(probe);
    values[i] = p;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_l2: size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), std::numeric_limits<double>::min());
}

}  // namespace wanco
