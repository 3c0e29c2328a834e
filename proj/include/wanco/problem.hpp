#pragma once

#include "wanco/diffcore.hpp"
#include "wanco/netarch.hpp"
#include "wanco/sampling.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wanco {

/// A network bound to its slice of the run's ParamStore.
struct NetworkSlot {
  std::string name;
  bool adversarial = false;
  std::variant<ResNet, ScalarMultiplierNet> net;
  std::size_t offset = 0;

  std::size_t param_count() const;
  ParamLayout layout() const;
  std::span<const double> params(const ParamStore& store) const { return store.range(offset, param_count()); }
  std::span<double> params(ParamStore& store) const { return store.range(offset, param_count()); }
  const ResNet& resnet() const { return std::get<ResNet>(net); }
  const ScalarMultiplierNet& scalar() const { return std::get<ScalarMultiplierNet>(net); }
};

/// One constraint C(u) = 0 with its own (beta, alpha) channel. A channel may
/// hold several scalar components (the partition family has one per phase).
struct ConstraintChannel {
  std::string name;
  std::vector<std::string> components;
  bool penalized = true;  // false: the beta term is dropped (beta forced to 0)
  bool amplified = true;  // false: beta stays at beta0 (plain penalty baseline)
};

/// Achieved value of a constraint quantity and the value it should take.
struct ConstraintValue {
  double achieved = 0.0;
  double target = 0.0;
  double residual() const { return achieved - target; }
};

struct Term {
  std::string name;
  double value = 0.0;
};

struct Batches {
  SampleBatch interior;
  std::optional<BoundaryBatch> boundary;
};

struct Evaluation {
  double loss = 0.0;
  double objective = 0.0;  // C0 * L(u) part only
  std::vector<Term> terms;  // sums to loss
  std::vector<ConstraintValue> constraints;  // flattened over channels and components
  std::vector<double> multipliers;  // one entry per multiplier_labels()
};

/// Per-network gradient request, indexed like networks().
using GradMask = std::vector<bool>;

class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string_view family() const = 0;
  virtual Box domain() const = 0;
  virtual bool uses_boundary() const { return false; }
  virtual std::vector<ConstraintChannel> channels() const = 0;
  /// Scalar multipliers are reported by value, field multipliers by their
  /// discrete L2 norm over the batch.
  virtual std::vector<std::string> multiplier_labels() const = 0;

  /// Loss L_beta on the given batches. Gradients of networks flagged in
  /// `want` are added into `adjoint` (which may be null when nothing is wanted).
  virtual Evaluation evaluate(const ParamStore& params, const Batches& batches, std::span<const double> betas,
                              const GradMask& want, AdjointAccumulator* adjoint) const = 0;

  /// Column names written after the coordinates in grid exports.
  virtual std::vector<std::string> grid_columns() const = 0;
  /// Evaluates grid_columns() at points x (d x B); result is columns x B.
  virtual Matrix grid_values(const ParamStore& params, const Matrix& x) const = 0;

  const std::vector<NetworkSlot>& networks() const noexcept { return slots_; }
  std::size_t network_index(std::string_view name) const;
  std::size_t constraint_count() const;

  /// Declares every network's segments and initialises them from `seed`.
  ParamStore make_params(std::uint64_t seed) const;
  /// Declares segments only (all zeros); used to validate stored manifests.
  ParamStore make_layout() const;

 protected:
  void add_network(std::string name, bool adversarial, std::variant<ResNet, ScalarMultiplierNet> net);

 private:
  std::vector<NetworkSlot> slots_;
};

/// A ResNet evaluated over a point set in fixed-size chunks.
struct NetPass {
  std::vector<ResNet::Cache> caches;  // empty unless kept for backward
  BatchJet out;
};

NetPass forward_chunked(const ResNet& net, std::span<const double> params, const Matrix& points, bool with_jacobian,
                        bool keep_cache);
/// Reverse pass over `pass`; per-chunk gradients are summed in chunk order.
void backward_chunked(const ResNet& net, std::span<const double> params, const NetPass& pass, const BatchJet& seed,
                      std::span<double> grad);

/// sqrt(weight * sum_b |v_b|^2) over all rows and columns.
double field_norm(const Matrix& values, double weight);

}  // namespace wanco
