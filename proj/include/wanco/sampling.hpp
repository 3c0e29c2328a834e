#pragma once

#include "wanco/diffcore.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace wanco {

/// Axis-aligned box [lo_i, hi_i].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit(int d);
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  /// Throws std::invalid_argument when a side has non-positive length.
  void validate() const;
};

/// Interior collocation points (d x N) with uniform MC weight volume/N.
struct SampleBatch {
  Matrix points;
  double weight = 0.0;

  Eigen::Index size() const { return points.cols(); }
};

/// Points on the faces of a box. Face f = 2*axis + side (side 0: lo, 1: hi).
struct BoundaryBatch {
  Matrix points;
  std::vector<int> face;            // per point
  std::vector<double> face_weight;  // per face: face measure / points on face

  Eigen::Index size() const { return points.cols(); }
  double weight_of(Eigen::Index i) const { return face_weight[static_cast<std::size_t>(face[static_cast<std::size_t>(i)])]; }
  double total_weight() const;
};

/// i.i.d. uniform points; deterministic per seed.
SampleBatch sample_uniform(const Box& box, std::size_t n, std::uint64_t seed);

/// Point i: (i/n, phi_2(i), phi_3(i), phi_5(i)) truncated to d, mapped into the box.
SampleBatch hammersley(std::size_t n, int d, const Box& box);
SampleBatch hammersley(std::size_t n, int d);

/// Van der Corput radical inverse of i in `base`.
double radical_inverse(std::uint64_t i, unsigned base);

BoundaryBatch sample_boundary_box(const Box& box, std::size_t n_per_face, std::uint64_t seed);

/// sum(values) * weight. Throws on an empty range.
double mc_integral(std::span<const double> values, double weight);

}  // namespace wanco
