#include "problem_util.hpp"
#include "wanco/problems.hpp"

#include <stdexcept>

namespace wanco {

void PartitionSpec::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("partition: epsilon must be > 0");
  if (n < 2) throw std::invalid_argument("partition: n must be >= 2");
  if (d < 2 || d > 4) throw std::invalid_argument("partition: d must be 2, 3 or 4");
}

double interaction_term(std::span<const double> u) {
  double s = 0.0, q = 0.0;
  for (double v : u) {
    s += v * v;
    q += v * v * v * v;
  }
  return s * s - q;
}

int argmax_projection(std::span<const double> u) {
  if (u.empty()) throw std::invalid_argument("argmax_projection: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] > u[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

PartitionProblem::PartitionProblem(PartitionSpec spec, NetShape primal, MultiplierShape multiplier)
    : spec_(spec) {
  spec_.validate();
  ResNetConfig u{spec_.d, spec_.n, primal.depth, primal.width, primal.activation, InputTransform::Identity,
                 OutputTransform::partition_nonneg_dirichlet()};
  if (spec_.bc == PartitionBc::Periodic) {
    u.input = InputTransform::PeriodicEmbed;
    u.output = OutputTransform::nonneg();
  }
  add_network("u", false, ResNet(u));
  add_network("lambda", true, ScalarMultiplierNet({multiplier.width, spec_.n, multiplier.activation}));
}

std::vector<ConstraintChannel> PartitionProblem::channels() const {
  ConstraintChannel mass{"mass", {}};
  for (int i = 1; i <= spec_.n; ++i) mass.components.push_back("mass_" + std::to_string(i));
  return {mass};
}

std::vector<std::string> PartitionProblem::multiplier_labels() const {
  std::vector<std::string> out;
  for (int i = 1; i <= spec_.n; ++i) out.push_back("lambda_" + std::to_string(i));
  return out;
}

std::vector<std::string> PartitionProblem::grid_columns() const {
  std::vector<std::string> out;
  for (int i = 1; i <= spec_.n; ++i) out.push_back("u" + std::to_string(i));
  out.push_back("phase");
  return out;
}

Evaluation PartitionProblem::evaluate(const ParamStore& params, const Batches& batches,
                                      std::span<const double> betas, const GradMask& want,
                                      AdjointAccumulator* adjoint) const {
  const auto& slots = networks();
  const ResNet& net = slots[0].resnet();
  const auto theta = slots[0].params(params);
  const SampleBatch& batch = batches.interior;
  const double w = batch.weight;
  const double eps = spec_.epsilon;
  const double beta = betas.empty() ? 0.0 : betas[0];
  const int n = spec_.n;

  const NetPass pass = forward_chunked(net, theta, batch.points, true, detail::wanted(want, 0));
  const auto u = pass.out.value.array();
  const Eigen::ArrayXd s = u.square().colwise().sum().transpose();

  double grad_sq = 0.0;
  for (const auto& jac : pass.out.jacobian) grad_sq += jac.squaredNorm();
  const double interaction = (s.square() - u.square().square().colwise().sum().transpose()).sum();
  const double energy = w * (0.5 * eps * grad_sq + interaction / eps);

  const Vector lambda = slots[1].scalar().value(slots[1].params(params));
  const Vector mass = w * u.square().rowwise().sum().matrix();
  const Vector r = mass.array() - 1.0;

  Evaluation eval;
  eval.objective = spec_.C0 * energy;
  eval.terms.push_back({"energy", eval.objective});
  eval.terms.push_back({"multiplier", -lambda.dot(r)});
  eval.terms.push_back({"penalty", 0.5 * beta * r.squaredNorm()});
  detail::finalize_terms(family(), eval);
  for (int i = 0; i < n; ++i) {
    eval.constraints.push_back({mass(i), 1.0});
    eval.multipliers.push_back(lambda(i));
  }

  if (detail::wanted(want, 0)) {
    const Eigen::ArrayXd drive = -lambda.array() + beta * r.array();
    BatchJet seed;
    const Eigen::ArrayXXd inter = 4.0 * u * (s.transpose().replicate(n, 1) - u.square());
    const Eigen::ArrayXXd pull = u.colwise() * drive;
    seed.value = (w * (spec_.C0 / eps * inter + 2.0 * pull)).matrix();
    for (const auto& jac : pass.out.jacobian) seed.jacobian.push_back(w * spec_.C0 * eps * jac);
    backward_chunked(net, theta, pass, seed, detail::grad_of(adjoint, slots[0]));
  }
  if (detail::wanted(want, 1)) {
    slots[1].scalar().backward(slots[1].params(params), -r, detail::grad_of(adjoint, slots[1]));
  }
  return eval;
}

Matrix PartitionProblem::grid_values(const ParamStore& params, const Matrix& x) const {
  const auto& slot = networks()[0];
  const Matrix u = forward_chunked(slot.resnet(), slot.params(params), x, false, false).out.value;
  Matrix out(u.rows() + 1, u.cols());
  out.topRows(u.rows()) = u;
  for (Eigen::Index b = 0; b < u.cols(); ++b) {
    const Vector col = u.col(b);
    out(u.rows(), b) = argmax_projection(std::span<const double>(col.data(), col.size()));
  }
  return out;
}

}  // namespace wanco
