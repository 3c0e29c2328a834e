#include "problem_util.hpp"
#include "wanco/problems.hpp"

#include <stdexcept>

namespace wanco {

GlMethod parse_gl_method(std::string_view name) {
  if (name == "wanco") return GlMethod::Wanco;
  if (name == "drm_p") return GlMethod::Penalty;
  if (name == "drm_ap") return GlMethod::AdaptivePenalty;
  if (name == "lagrange_only") return GlMethod::LagrangeOnly;
  throw std::invalid_argument("unknown GL method '" + std::string(name) + "'");
}

std::string_view to_string(GlMethod method) {
  switch (method) {
    case GlMethod::Wanco: return "wanco";
    case GlMethod::Penalty: return "drm_p";
    case GlMethod::AdaptivePenalty: return "drm_ap";
    case GlMethod::LagrangeOnly: return "lagrange_only";
  }
  return "?";
}

void GlSpec::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gl: epsilon must be > 0");
}

GlProblem::GlProblem(GlSpec spec, NetShape primal, MultiplierShape multiplier) : spec_(spec) {
  spec_.validate();
  ResNetConfig u{2, 1, primal.depth, primal.width, primal.activation, InputTransform::Identity,
                 OutputTransform::hard_dirichlet_gl()};
  add_network("u", false, ResNet(u));
  if (has_multiplier()) {
    add_network("lambda", true, ScalarMultiplierNet({multiplier.width, 1, multiplier.activation}));
  }
}

bool GlProblem::has_multiplier() const noexcept {
  return spec_.method == GlMethod::Wanco || spec_.method == GlMethod::LagrangeOnly;
}

std::vector<ConstraintChannel> GlProblem::channels() const {
  ConstraintChannel mass{"mass", {"mass"}};
  mass.penalized = spec_.method != GlMethod::LagrangeOnly;
  mass.amplified = spec_.method != GlMethod::Penalty;
  return {mass};
}

std::vector<std::string> GlProblem::multiplier_labels() const {
  if (has_multiplier()) return {"lambda"};
  return {};
}

Evaluation GlProblem::evaluate(const ParamStore& params, const Batches& batches, std::span<const double> betas,
                               const GradMask& want, AdjointAccumulator* adjoint) const {
  const auto& slots = networks();
  const ResNet& net = slots[0].resnet();
  const auto theta = slots[0].params(params);
  const SampleBatch& batch = batches.interior;
  const double w = batch.weight;
  const double eps = spec_.epsilon;
  const double beta = betas.empty() ? 0.0 : betas[0];

  const NetPass pass = forward_chunked(net, theta, batch.points, true, detail::wanted(want, 0));
  const auto u = pass.out.value.row(0).array();
  const auto gx = pass.out.jacobian[0].row(0).array();
  const auto gy = pass.out.jacobian[1].row(0).array();

  const double energy = w * (0.5 * eps * (gx.square() + gy.square()) + (u.square() - 1.0).square() / eps).sum();
  const double mass = w * u.sum();
  const double r = mass - spec_.V;
  const double lambda = has_multiplier() ? slots[1].scalar().value(slots[1].params(params))(0) : 0.0;

  Evaluation eval;
  eval.objective = spec_.C0 * energy;
  eval.terms.push_back({"energy", eval.objective});
  if (has_multiplier()) eval.terms.push_back({"multiplier", -lambda * r});
  if (spec_.method != GlMethod::LagrangeOnly) eval.terms.push_back({"penalty", 0.5 * beta * r * r});
  detail::finalize_terms(family(), eval);
  eval.constraints.push_back({mass, spec_.V});
  if (has_multiplier()) eval.multipliers.push_back(lambda);

  const double drive = (has_multiplier() ? -lambda : 0.0) + (spec_.method != GlMethod::LagrangeOnly ? beta * r : 0.0);
  if (detail::wanted(want, 0)) {
    BatchJet seed;
    seed.value = (w * (spec_.C0 * 4.0 / eps * u * (u.square() - 1.0) + drive)).matrix();
    seed.jacobian.push_back((w * spec_.C0 * eps * gx).matrix());
    seed.jacobian.push_back((w * spec_.C0 * eps * gy).matrix());
    backward_chunked(net, theta, pass, seed, detail::grad_of(adjoint, slots[0]));
  }
  if (has_multiplier() && detail::wanted(want, 1)) {
    const Vector seed = Vector::Constant(1, -r);
    slots[1].scalar().backward(slots[1].params(params), seed, detail::grad_of(adjoint, slots[1]));
  }
  return eval;
}

Matrix GlProblem::grid_values(const ParamStore& params, const Matrix& x) const {
  const auto& slot = networks()[0];
  return forward_chunked(slot.resnet(), slot.params(params), x, false, false).out.value;
}

}  // namespace wanco
