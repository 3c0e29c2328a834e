#include "wanco/sampling.hpp"

#include "wanco/rng.hpp"

#include <array>
#include <stdexcept>

namespace wanco {

Box Box::unit(int d) {
  return Box{std::vector<double>(static_cast<std::size_t>(d), 0.0), std::vector<double>(static_cast<std::size_t>(d), 1.0)};
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("box: malformed bounds");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i])) throw std::invalid_argument("box: degenerate side along axis " + std::to_string(i));
  }
}

double BoundaryBatch::total_weight() const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) total += weight_of(i);
  return total;
}

SampleBatch sample_uniform(const Box& box, std::size_t n, std::uint64_t seed) {
  box.validate();
  if (n == 0) throw std::invalid_argument("sample_uniform: n must be >= 1");
  const int d = box.dim();
  const CounterRng rng(seed);
  SampleBatch batch;
  batch.points.resize(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double u = rng.uniform(i * static_cast<std::size_t>(d) + ku);
      batch.points(k, static_cast<Eigen::Index>(i)) = box.lo[ku] + u * (box.hi[ku] - box.lo[ku]);
    }
  }
  batch.weight = box.volume() / static_cast<double>(n);
  return batch;
}

double radical_inverse(std::uint64_t i, unsigned base) {
  const double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

SampleBatch hammersley(std::size_t n, int d, const Box& box) {
  constexpr std::array<unsigned, 3> kBases{2, 3, 5};
  box.validate();
  if (n == 0) throw std::invalid_argument("hammersley: n must be >= 1");
  if (d < 1 || d > 4 || box.dim() != d) throw std::invalid_argument("hammersley: supports 1 <= d <= 4");
  SampleBatch batch;
  batch.points.resize(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double u = k == 0 ? static_cast<double>(i) / static_cast<double>(n) : radical_inverse(i, kBases[ku - 1]);
      batch.points(k, static_cast<Eigen::Index>(i)) = box.lo[ku] + u * (box.hi[ku] - box.lo[ku]);
    }
  }
  batch.weight = box.volume() / static_cast<double>(n);
  return batch;
}

SampleBatch hammersley(std::size_t n, int d) { return hammersley(n, d, Box::unit(d)); }

BoundaryBatch sample_boundary_box(const Box& box, std::size_t n_per_face, std::uint64_t seed) {
  box.validate();
  if (n_per_face == 0) throw std::invalid_argument("sample_boundary_box: n_per_face must be >= 1");
  const int d = box.dim();
  const int faces = 2 * d;
  const CounterRng rng(seed);
  BoundaryBatch out;
  out.points.resize(d, static_cast<Eigen::Index>(n_per_face) * faces);
  out.face.reserve(n_per_face * static_cast<std::size_t>(faces));
  const double volume = box.volume();
  Eigen::Index col = 0;
  for (int f = 0; f < faces; ++f) {
    const int axis = f / 2;
    const auto au = static_cast<std::size_t>(axis);
    const double measure = d == 1 ? 1.0 : volume / (box.hi[au] - box.lo[au]);
    out.face_weight.push_back(measure / static_cast<double>(n_per_face));
    for (std::size_t i = 0; i < n_per_face; ++i, ++col) {
      for (int k = 0; k < d; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (k == axis) {
          out.points(k, col) = (f % 2 == 0) ? box.lo[ku] : box.hi[ku];
        } else {
          const double u = rng.uniform(static_cast<std::uint64_t>(col) * static_cast<std::uint64_t>(d) + ku);
          out.points(k, col) = box.lo[ku] + u * (box.hi[ku] - box.lo[ku]);
        }
      }
      out.face.push_back(f);
    }
  }
  return out;
}

double mc_integral(std::span<const double> values, double weight) {
  if (values.empty()) throw std::invalid_argument("mc_integral: empty batch");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * weight;
}

}  // namespace wanco
