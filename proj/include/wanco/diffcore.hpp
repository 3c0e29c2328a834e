#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wanco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Storage with a fixed base alignment so vectorised reductions over mapped
/// segments sum in the same order on every allocation.
using AlignedVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Raised when a loss, a loss term, or a gradient entry is NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Flat parameter vector for every network of a run, split into named
/// segments ("u/W_in", "lambda/b_out", ...) that tile it exactly.
class ParamStore {
 public:
  /// Appends a zero-initialised segment and returns its offset.
  std::size_t append(std::string name, std::size_t length);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> range(std::size_t offset, std::size_t length);
  std::span<const double> range(std::size_t offset, std::size_t length) const;

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const Segment* find(std::string_view name) const;
  /// Segment owning flat index i.
  const Segment& segment_at(std::size_t i) const;

  /// Throws std::logic_error / NonFiniteError when segments do not tile the
  /// vector or an entry is not finite.
  void check_invariants() const;

 private:
  AlignedVector values_;
  std::vector<Segment> segments_;
};

/// Network output at one point together with d(output)/d(input coordinate).
struct SpatialJet {
  Vector value;     // n_out
  Matrix jacobian;  // n_out x d
};

/// Batched jet: value is n_out x B; jacobian[j] holds d/dx_j, also n_out x B.
/// An empty jacobian means the pass ran without tangents. The same shape is
/// used for adjoint seeds flowing back into a network.
struct BatchJet {
  Matrix value;
  std::vector<Matrix> jacobian;

  static BatchJet zeros_like(const BatchJet& other);
  /// Copies columns [begin, begin+count).
  BatchJet columns(Eigen::Index begin, Eigen::Index count) const;
};

/// Gradient of a scalar loss with respect to every entry of a ParamStore.
class AdjointAccumulator {
 public:
  AdjointAccumulator() = default;
  explicit AdjointAccumulator(std::size_t n) : grad_(n, 0.0) {}

  std::size_t size() const noexcept { return grad_.size(); }
  std::span<double> grad() noexcept { return grad_; }
  std::span<const double> grad() const noexcept { return grad_; }
  std::span<double> range(std::size_t offset, std::size_t length) {
    return std::span<double>(grad_).subspan(offset, length);
  }

  void add(std::size_t offset, std::span<const double> g);
  void clear();

 private:
  AlignedVector grad_;
};

/// A differentiable loss over the parameter store. When `adjoint` is non-null
/// the implementation adds dL/dparams into it; the return value is L.
using LossFunction = std::function<double(const ParamStore&, AdjointAccumulator*)>;
using LossValue = std::function<double(const ParamStore&)>;

/// Evaluates `loss` with gradient accumulation. Throws NonFiniteError naming
/// the first segment with a non-finite gradient entry.
AdjointAccumulator backprop_loss(const LossFunction& loss, const ParamStore& params);

/// Central differences with per-coordinate step h * max(1, |p_i|).
std::vector<double> finite_diff_grad(const LossValue& loss, const ParamStore& params, double h);

/// ||a - b||_2 / max(||b||_2, tiny).
double relative_l2(std::span<const double> a, std::span<const double> b);

}  // namespace wanco
