#pragma once

#include "wanco/problem.hpp"

#include <array>
#include <string>
#include <string_view>

namespace wanco {

/// Depth/width/activation of a ResNet whose transforms the family fixes.
struct NetShape {
  int depth = 4;
  int width = 50;
  Activation activation = Activation::Tanh3;
};

struct MultiplierShape {
  int width = 10;
  Activation activation = Activation::Tanh3;
};

// ------------------------------------------------------------ Ginzburg-Landau

enum class GlMethod { Wanco, Penalty, AdaptivePenalty, LagrangeOnly };

GlMethod parse_gl_method(std::string_view name);
std::string_view to_string(GlMethod method);

struct GlSpec {
  double epsilon = 0.05;
  double V = -0.5;
  double C0 = 400.0;
  GlMethod method = GlMethod::Wanco;
  void validate() const;
};

/// min C0 * int eps/2 |grad u|^2 + 1/eps (u^2-1)^2  s.t.  int u = V, u = -1 on the boundary.
/// Networks: "u" (hard Dirichlet output) and, unless the method is a DRM
/// baseline, the scalar multiplier "lambda".
class GlProblem final : public Problem {
 public:
  GlProblem(GlSpec spec, NetShape primal, MultiplierShape multiplier);

  const GlSpec& spec() const noexcept { return spec_; }
  bool has_multiplier() const noexcept;

  std::string_view family() const override { return "gl"; }
  Box domain() const override { return Box::unit(2); }
  std::vector<ConstraintChannel> channels() const override;
  std::vector<std::string> multiplier_labels() const override;
  Evaluation evaluate(const ParamStore& params, const Batches& batches, std::span<const double> betas,
                      const GradMask& want, AdjointAccumulator* adjoint) const override;
  std::vector<std::string> grid_columns() const override { return {"u"}; }
  Matrix grid_values(const ParamStore& params, const Matrix& x) const override;

 private:
  GlSpec spec_;
};

// ----------------------------------------------------------------- Partition

enum class PartitionBc { Dirichlet, Periodic };

struct PartitionSpec {
  double epsilon = 0.05;
  int n = 2;
  int d = 2;
  PartitionBc bc = PartitionBc::Dirichlet;
  double C0 = 100.0;
  void validate() const;
};

/// f(u) = sum_{i != j} u_i^2 u_j^2 over ordered pairs.
double interaction_term(std::span<const double> u);

/// 1-based index of the largest component; ties go to the lowest index.
int argmax_projection(std::span<const double> u);

/// min C0 * int eps/2 sum|grad u_i|^2 + f(u)/eps  s.t.  int u_i^2 = 1.
class PartitionProblem final : public Problem {
 public:
  PartitionProblem(PartitionSpec spec, NetShape primal, MultiplierShape multiplier);

  const PartitionSpec& spec() const noexcept { return spec_; }

  std::string_view family() const override { return "partition"; }
  Box domain() const override { return Box::unit(spec_.d); }
  std::vector<ConstraintChannel> channels() const override;
  std::vector<std::string> multiplier_labels() const override;
  Evaluation evaluate(const ParamStore& params, const Batches& batches, std::span<const double> betas,
                      const GradMask& want, AdjointAccumulator* adjoint) const override;
  std::vector<std::string> grid_columns() const override;
  Matrix grid_values(const ParamStore& params, const Matrix& x) const override;

 private:
  PartitionSpec spec_;
};

// --------------------------------------------------------------- Fluid-solid

enum class FluidBc { Example1, Example2 };

struct FluidSolidSpec {
  double epsilon = 0.01;
  double alpha0 = 250000.0;
  double C_alpha = 100.0;
  double C_eps = 10.0;
  double C_V = 0.5;
  double length = 1.0;  // domain [0, length] x [0, 1]
  FluidBc bc = FluidBc::Example1;
  void validate() const;
};

/// 1/2 |grad u|^2 + 1/2 alpha0 (1-phi)^2 |u|^2. grad_u is row-major 2x2 (du_c/dx_j at [2c+j]).
double j_alpha(std::span<const double> u, std::span<const double> grad_u, double phi, double alpha0);
/// eps/2 |grad phi|^2 + F(phi)/eps with F = phi^2 (1-phi)^2 / 4.
double j_eps(double phi, std::span<const double> grad_phi, double epsilon);
double double_well(double phi);

/// Inlet 1/2 sin(pi y) at x=0, outlet 3/2 sin((3y-1) pi) on y in [1/3,2/3] at x=1.
std::array<double, 2> bc_example1(std::span<const double> x);
/// Bumps 1-(12y-3)^2 on [1/6,2/6] and 1-(12y-9)^2 on [4/6,5/6] on both x=0 and x=l.
std::array<double, 2> bc_example2(std::span<const double> x, double length);
/// 1 when phi >= 1/2, else 0.
int threshold_projection(double phi);

/// Divergence-free velocity, volume fraction and boundary data as three
/// constraint channels; the pressure p is the multiplier of div u = 0.
/// Networks: "u" (outputs u1, u2, phi), "p", "lambda1" (scalar), "lambda2" (on the boundary).
class FluidSolidProblem final : public Problem {
 public:
  FluidSolidProblem(FluidSolidSpec spec, NetShape primal, NetShape pressure, MultiplierShape volume,
                    NetShape boundary);

  const FluidSolidSpec& spec() const noexcept { return spec_; }
  std::array<double, 2> boundary_data(std::span<const double> x) const;

  std::string_view family() const override { return "fluid_solid"; }
  Box domain() const override;
  bool uses_boundary() const override { return true; }
  std::vector<ConstraintChannel> channels() const override;
  std::vector<std::string> multiplier_labels() const override;
  Evaluation evaluate(const ParamStore& params, const Batches& batches, std::span<const double> betas,
                      const GradMask& want, AdjointAccumulator* adjoint) const override;
  std::vector<std::string> grid_columns() const override { return {"u1", "u2", "phi", "phi_proj"}; }
  Matrix grid_values(const ParamStore& params, const Matrix& x) const override;

 private:
  FluidSolidSpec spec_;
};

// ------------------------------------------------------------------ Obstacle

enum class ObstacleId { Psi1, Psi2, Psi3 };

ObstacleId parse_obstacle(std::string_view name);
std::string_view to_string(ObstacleId id);

struct ObstacleSpec {
  ObstacleId obstacle = ObstacleId::Psi1;
  double g0 = 0.0;
  double g1 = 0.0;
  double C0 = 100.0;
  /// The boundary values that go with each obstacle (0/0, 0/0, 5/10).
  static ObstacleSpec defaults(ObstacleId id);
};

double obstacle_psi(ObstacleId id, double x);

/// min C0 int |u'|^2  s.t.  u >= psi; the multiplier network is non-positive.
class ObstacleProblem final : public Problem {
 public:
  ObstacleProblem(ObstacleSpec spec, NetShape primal, NetShape multiplier);

  const ObstacleSpec& spec() const noexcept { return spec_; }

  std::string_view family() const override { return "obstacle"; }
  Box domain() const override { return Box::unit(1); }
  std::vector<ConstraintChannel> channels() const override;
  std::vector<std::string> multiplier_labels() const override { return {"lambda_norm"}; }
  Evaluation evaluate(const ParamStore& params, const Batches& batches, std::span<const double> betas,
                      const GradMask& want, AdjointAccumulator* adjoint) const override;
  std::vector<std::string> grid_columns() const override { return {"u", "psi", "lambda"}; }
  Matrix grid_values(const ParamStore& params, const Matrix& x) const override;

 private:
  ObstacleSpec spec_;
};

}  // namespace wanco
