#include "wanco/problem.hpp"

#include "wanco/parallel.hpp"
#include "wanco/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace wanco {

std::size_t NetworkSlot::param_count() const {
  return std::visit([](const auto& n) { return n.param_count(); }, net);
}

ParamLayout NetworkSlot::layout() const {
  return std::visit([](const auto& n) { return n.layout(); }, net);
}

std::size_t Problem::network_index(std::string_view name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == name) return i;
  }
  throw std::out_of_range("no network named '" + std::string(name) + "'");
}

std::size_t Problem::constraint_count() const {
  std::size_t n = 0;
  for (const auto& c : channels()) n += c.components.size();
  return n;
}

void Problem::add_network(std::string name, bool adversarial, std::variant<ResNet, ScalarMultiplierNet> net) {
  std::size_t offset = 0;
  if (!slots_.empty()) offset = slots_.back().offset + slots_.back().param_count();
  slots_.push_back(NetworkSlot{std::move(name), adversarial, std::move(net), offset});
}

ParamStore Problem::make_layout() const {
  ParamStore store;
  for (const auto& slot : slots_) {
    const std::size_t at = declare_segments(store, slot.name, slot.layout());
    if (at != slot.offset) throw std::logic_error("network offsets out of sync with parameter layout");
  }
  return store;
}

ParamStore Problem::make_params(std::uint64_t seed) const {
  ParamStore store = make_layout();
  const CounterRng root(seed);
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const auto& slot = slots_[k];
    const std::uint64_t net_seed = root.derive(k).key();
    std::visit([&](const auto& n) { n.init_params(slot.params(store), net_seed); }, slot.net);
  }
  return store;
}

NetPass forward_chunked(const ResNet& net, std::span<const double> params, const Matrix& points, bool with_jacobian,
                        bool keep_cache) {
  const auto n = static_cast<std::size_t>(points.cols());
  const std::size_t chunks = chunk_count(n);
  std::vector<BatchJet> parts(chunks);
  NetPass pass;
  if (keep_cache) pass.caches.resize(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const auto begin = static_cast<Eigen::Index>(c * kChunkSize);
    const auto count = static_cast<Eigen::Index>(std::min(kChunkSize, n - c * kChunkSize));
    parts[c] = net.forward(params, points.middleCols(begin, count), with_jacobian,
                           keep_cache ? &pass.caches[c] : nullptr);
  });
  const int d_out = net.config().d_out;
  const auto total = static_cast<Eigen::Index>(n);
  pass.out.value.resize(d_out, total);
  if (with_jacobian) pass.out.jacobian.assign(static_cast<std::size_t>(net.config().d_in), Matrix(d_out, total));
  for (std::size_t c = 0; c < chunks; ++c) {
    const auto begin = static_cast<Eigen::Index>(c * kChunkSize);
    const Eigen::Index count = parts[c].value.cols();
    pass.out.value.middleCols(begin, count) = parts[c].value;
    for (std::size_t j = 0; j < parts[c].jacobian.size(); ++j) {
      pass.out.jacobian[j].middleCols(begin, count) = parts[c].jacobian[j];
    }
  }
  return pass;
}

void backward_chunked(const ResNet& net, std::span<const double> params, const NetPass& pass, const BatchJet& seed,
                      std::span<double> grad) {
  const std::size_t chunks = pass.caches.size();
  if (chunks == 0 && seed.value.cols() > 0) throw std::logic_error("backward_chunked: forward pass kept no cache");
  std::vector<AlignedVector> partial(chunks, AlignedVector(grad.size(), 0.0));
  parallel_for(chunks, [&](std::size_t c) {
    const auto begin = static_cast<Eigen::Index>(c * kChunkSize);
    const Eigen::Index count = pass.caches[c].batch;
    net.backward(params, pass.caches[c], seed.columns(begin, count), partial[c]);
  });
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += p[i];
  }
}

double field_norm(const Matrix& values, double weight) { return std::sqrt(weight * values.squaredNorm()); }

}  // namespace wanco
