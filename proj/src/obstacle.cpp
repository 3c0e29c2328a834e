#include "problem_util.hpp"
#include "wanco/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wanco {

ObstacleId parse_obstacle(std::string_view name) {
  if (name == "psi1") return ObstacleId::Psi1;
  if (name == "psi2") return ObstacleId::Psi2;
  if (name == "psi3") return ObstacleId::Psi3;
  throw std::invalid_argument("unknown obstacle '" + std::string(name) + "'");
}

std::string_view to_string(ObstacleId id) {
  switch (id) {
    case ObstacleId::Psi1: return "psi1";
    case ObstacleId::Psi2: return "psi2";
    case ObstacleId::Psi3: return "psi3";
  }
  return "?";
}

ObstacleSpec ObstacleSpec::defaults(ObstacleId id) {
  ObstacleSpec spec;
  spec.obstacle = id;
  if (id == ObstacleId::Psi3) {
    spec.g0 = 5.0;
    spec.g1 = 10.0;
  }
  return spec;
}

double obstacle_psi(ObstacleId id, double x) {
  constexpr double pi = std::numbers::pi;
  switch (id) {
    case ObstacleId::Psi1: {
      const double t = x <= 0.5 ? x : 1.0 - x;
      return t <= 0.25 ? 100.0 * t * t : 100.0 * t * (1.0 - t) - 12.5;
    }
    case ObstacleId::Psi2: {
      const double t = x <= 0.5 ? x : 1.0 - x;
      return t <= 0.25 ? 10.0 * std::sin(2.0 * pi * t) : 5.0 * std::cos(pi * (4.0 * t - 1.0)) + 5.0;
    }
    case ObstacleId::Psi3: {
      const double s = std::sin(pi * (x + 1.0) * (x + 1.0));
      return 10.0 * s * s;
    }
  }
  return 0.0;
}

ObstacleProblem::ObstacleProblem(ObstacleSpec spec, NetShape primal, NetShape multiplier) : spec_(spec) {
  add_network("u", false,
              ResNet({1, 1, primal.depth, primal.width, primal.activation, InputTransform::Identity,
                      OutputTransform::obstacle_affine(spec_.g0, spec_.g1)}));
  add_network("lambda", true,
              ResNet({1, 1, multiplier.depth, multiplier.width, multiplier.activation, InputTransform::Identity,
                      OutputTransform::nonpos()}));
}

std::vector<ConstraintChannel> ObstacleProblem::channels() const { return {{"obstacle", {"violation"}}}; }

// The reported constraint value is the largest violation max(psi - u, 0) on the batch.
Evaluation ObstacleProblem::evaluate(const ParamStore& params, const Batches& batches,
                                     std::span<const double> betas, const GradMask& want,
                                     AdjointAccumulator* adjoint) const {
  const auto& slots = networks();
  const ResNet& net = slots[0].resnet();
  const auto theta = slots[0].params(params);
  const SampleBatch& batch = batches.interior;
  const double w = batch.weight;
  const double beta = betas.empty() ? 0.0 : betas[0];

  const NetPass pass = forward_chunked(net, theta, batch.points, true, detail::wanted(want, 0));
  const NetPass l_pass = forward_chunked(slots[1].resnet(), slots[1].params(params), batch.points, false,
                                         detail::wanted(want, 1));
  const Eigen::Index n = batch.size();
  Eigen::ArrayXXd psi(1, n);
  for (Eigen::Index b = 0; b < n; ++b) psi(0, b) = obstacle_psi(spec_.obstacle, batch.points(0, b));
  const auto u = pass.out.value.array();
  const auto du = pass.out.jacobian[0].array();
  const auto lambda = l_pass.out.value.array();
  const Eigen::ArrayXXd gap = psi - u;
  const Eigen::ArrayXXd violation = gap.max(0.0);

  Evaluation eval;
  eval.objective = spec_.C0 * w * du.square().sum();
  eval.terms.push_back({"energy", eval.objective});
  eval.terms.push_back({"multiplier", -w * (lambda * gap).sum()});
  eval.terms.push_back({"penalty", 0.5 * beta * w * violation.square().sum()});
  detail::finalize_terms(family(), eval);
  eval.constraints.push_back({n > 0 ? violation.maxCoeff() : 0.0, 0.0});
  eval.multipliers.push_back(field_norm(l_pass.out.value, w));

  if (detail::wanted(want, 0)) {
    BatchJet seed;
    seed.value = (w * (lambda - beta * violation)).matrix();
    seed.jacobian.push_back((2.0 * spec_.C0 * w * du).matrix());
    backward_chunked(net, theta, pass, seed, detail::grad_of(adjoint, slots[0]));
  }
  if (detail::wanted(want, 1)) {
    BatchJet seed;
    seed.value = (-w * gap).matrix();
    backward_chunked(slots[1].resnet(), slots[1].params(params), l_pass, seed, detail::grad_of(adjoint, slots[1]));
  }
  return eval;
}

Matrix ObstacleProblem::grid_values(const ParamStore& params, const Matrix& x) const {
  const auto& slot = networks()[0];
  const auto& lam = networks()[1];
  const Matrix u = forward_chunked(slot.resnet(), slot.params(params), x, false, false).out.value;
  Matrix out(3, u.cols());
  out.row(0) = u;
  for (Eigen::Index b = 0; b < u.cols(); ++b) out(1, b) = obstacle_psi(spec_.obstacle, x(0, b));
  out.row(2) = forward_chunked(lam.resnet(), lam.params(params), x, false, false).out.value;
  return out;
}

}  // namespace wanco
