#pragma once

#include "wanco/activation.hpp"
#include "wanco/diffcore.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wanco {

enum class InputTransform { Identity, PeriodicEmbed };

struct OutputTransform {
  enum class Kind { Identity, HardDirichletGl, PartitionNonnegDirichlet, ObstacleAffine, Nonneg, Nonpos };
  Kind kind = Kind::Identity;
  double g0 = 0.0;  // ObstacleAffine only
  double g1 = 0.0;

  static OutputTransform identity() { return {}; }
  static OutputTransform hard_dirichlet_gl() { return {Kind::HardDirichletGl}; }
  static OutputTransform partition_nonneg_dirichlet() { return {Kind::PartitionNonnegDirichlet}; }
  static OutputTransform obstacle_affine(double g0, double g1) { return {Kind::ObstacleAffine, g0, g1}; }
  static OutputTransform nonneg() { return {Kind::Nonneg}; }
  static OutputTransform nonpos() { return {Kind::Nonpos}; }
};

struct ResNetConfig {
  int d_in = 2;
  int d_out = 1;
  int depth = 1;
  int width = 8;
  Activation activation = Activation::Tanh3;
  InputTransform input = InputTransform::Identity;
  OutputTransform output{};

  /// Width of the vector fed to the input layer (2*d_in under periodic_embed).
  int embedded_dim() const { return input == InputTransform::PeriodicEmbed ? 2 * d_in : d_in; }
  void validate() const;
};

/// One hidden layer fed by the constant input 0, so the output is a learned
/// constant vector lambda(0; eta).
struct ScalarMultiplierConfig {
  int width = 10;
  int d_out = 1;
  Activation activation = Activation::Tanh3;
  void validate() const;
};

// Pointwise constructions. Coordinates live in the unit box.

/// raw * x1(1-x1) x2(1-x2) - 1, so u = -1 on the boundary of [0,1]^2.
double hard_dirichlet_gl(double raw, std::span<const double> x);
/// max(raw_i, 0) * prod_k x_k(1-x_k).
std::vector<double> partition_nonneg_dirichlet(std::span<const double> raw, std::span<const double> x);
/// (cos 2pi x1, sin 2pi x1, ..., cos 2pi xd, sin 2pi xd).
std::vector<double> periodic_embed(std::span<const double> x);
/// -max(-raw, 0).
double nonpos_transform(double raw);
/// raw x(1-x) + g0(1-x) + g1 x.
double obstacle_affine(double raw, double x, double g0, double g1);

/// Segment suffixes and lengths in storage order.
using ParamLayout = std::vector<std::pair<std::string, std::size_t>>;

/// Appends "<prefix>/<suffix>" segments for `layout`; returns the offset of the first.
std::size_t declare_segments(ParamStore& store, const std::string& prefix, const ParamLayout& layout);

/// Residual network x1 = W_in e(x) + b_in, x_{k+1} = phi(W_k x_k + b_k) + x_k,
/// raw = W_out x_{depth+1} + b_out, followed by the configured output transform.
///
/// Every pass can carry forward-mode tangents d/dx_j alongside the values.
/// Internally each layer state is one matrix [value | d/dx_1 | ... | d/dx_d]
/// of shape width x (1+d)B, so each layer costs one GEMM. `backward` is the
/// reverse sweep over that extended pass; it needs phi'' because tangents are
/// scaled by phi'(z).
class ResNet {
 public:
  struct Cache {
    bool with_jacobian = false;
    Eigen::Index batch = 0;
    Matrix x;                    // d_in x B
    Matrix embed;                // d_eff x (1+d)B
    std::vector<Matrix> state;   // depth+1 entries, width x (1+d)B
    std::vector<Matrix> tangent_pre;  // per block: W_k * tangents, width x dB
    std::vector<Matrix> d1, d2;  // per block: phi'(z), phi''(z), width x B
    Matrix raw;                  // d_out x (1+d)B
  };

  explicit ResNet(ResNetConfig config);

  const ResNetConfig& config() const noexcept { return config_; }
  std::size_t param_count() const noexcept { return param_count_; }
  ParamLayout layout() const;

  /// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
  void init_params(std::span<double> params, std::uint64_t seed) const;

  /// x is d_in x B. Throws std::invalid_argument on dimension mismatch.
  BatchJet forward(std::span<const double> params, const Matrix& x, bool with_jacobian,
                   Cache* cache = nullptr) const;

  /// Adds d(loss)/d(params) into grad given d(loss)/d(outputs) in `seed`.
  /// A seed without jacobian blocks is treated as zero there.
  void backward(std::span<const double> params, const Cache& cache, const BatchJet& seed,
                std::span<double> grad) const;

  SpatialJet eval_with_input_grad(std::span<const double> params, std::span<const double> x) const;
  Vector eval(std::span<const double> params, std::span<const double> x) const;

 private:
  struct Offsets {
    std::size_t w_in, b_in, w_out, b_out;
    std::vector<std::size_t> w, b;
  };

  void apply_output_transform(const Matrix& x, Eigen::Index batch, int n_tan, const Matrix& raw,
                              Matrix& out) const;
  void output_transform_adjoint(const Matrix& x, Eigen::Index batch, int n_tan, const Matrix& raw,
                                const Matrix& seed, Matrix& raw_bar) const;

  ResNetConfig config_;
  Offsets off_;
  std::size_t param_count_ = 0;
};

class ScalarMultiplierNet {
 public:
  explicit ScalarMultiplierNet(ScalarMultiplierConfig config);

  const ScalarMultiplierConfig& config() const noexcept { return config_; }
  std::size_t param_count() const noexcept;
  ParamLayout layout() const;

  /// Glorot-uniform weights. The hidden bias is drawn from the same
  /// distribution as the hidden weights: with a constant zero input it is
  /// the only thing feeding the hidden layer, and at zero tanh^3 has a
  /// vanishing derivative, which would freeze the whole hidden layer.
  void init_params(std::span<double> params, std::uint64_t seed) const;

  Vector value(std::span<const double> params) const;
  void backward(std::span<const double> params, const Vector& seed, std::span<double> grad) const;

 private:
  ScalarMultiplierConfig config_;
};

}  // namespace wanco
