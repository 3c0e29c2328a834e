#include "problem_util.hpp"
#include "wanco/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wanco {

namespace {

constexpr double kEdgeTol = 1e-12;

double bump(double t) { return 1.0 - t * t; }

}  // namespace

void FluidSolidSpec::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fluid_solid: epsilon must be > 0");
  if (!(C_V > 0.0 && C_V < 1.0)) throw std::invalid_argument("fluid_solid: C_V must lie in (0, 1)");
  if (!(length > 0.0)) throw std::invalid_argument("fluid_solid: length must be > 0");
}

double double_well(double phi) { return 0.25 * phi * phi * (1.0 - phi) * (1.0 - phi); }

double j_alpha(std::span<const double> u, std::span<const double> grad_u, double phi, double alpha0) {
  if (u.size() != 2 || grad_u.size() != 4) throw std::invalid_argument("j_alpha: expects 2 components and a 2x2 gradient");
  double g = 0.0;
  for (double v : grad_u) g += v * v;
  const double m = 1.0 - phi;
  return 0.5 * g + 0.5 * alpha0 * m * m * (u[0] * u[0] + u[1] * u[1]);
}

double j_eps(double phi, std::span<const double> grad_phi, double epsilon) {
  double g = 0.0;
  for (double v : grad_phi) g += v * v;
  return 0.5 * epsilon * g + double_well(phi) / epsilon;
}

std::array<double, 2> bc_example1(std::span<const double> x) {
  const double y = x[1];
  if (x[0] <= kEdgeTol) return {0.5 * std::sin(std::numbers::pi * y), 0.0};
  if (x[0] >= 1.0 - kEdgeTol && y >= 1.0 / 3.0 && y <= 2.0 / 3.0) {
    return {1.5 * std::sin((3.0 * y - 1.0) * std::numbers::pi), 0.0};
  }
  return {0.0, 0.0};
}

std::array<double, 2> bc_example2(std::span<const double> x, double length) {
  const double y = x[1];
  if (x[0] > kEdgeTol && x[0] < length - kEdgeTol) return {0.0, 0.0};
  if (y >= 1.0 / 6.0 && y <= 2.0 / 6.0) return {bump(12.0 * y - 3.0), 0.0};
  if (y >= 4.0 / 6.0 && y <= 5.0 / 6.0) return {bump(12.0 * y - 9.0), 0.0};
  return {0.0, 0.0};
}

int threshold_projection(double phi) { return phi >= 0.5 ? 1 : 0; }

FluidSolidProblem::FluidSolidProblem(FluidSolidSpec spec, NetShape primal, NetShape pressure,
                                     MultiplierShape volume, NetShape boundary)
    : spec_(spec) {
  spec_.validate();
  add_network("u", false, ResNet({2, 3, primal.depth, primal.width, primal.activation}));
  add_network("p", true, ResNet({2, 1, pressure.depth, pressure.width, pressure.activation}));
  add_network("lambda1", true, ScalarMultiplierNet({volume.width, 1, volume.activation}));
  add_network("lambda2", true, ResNet({2, 2, boundary.depth, boundary.width, boundary.activation}));
}

Box FluidSolidProblem::domain() const { return Box{{0.0, 0.0}, {spec_.length, 1.0}}; }

std::array<double, 2> FluidSolidProblem::boundary_data(std::span<const double> x) const {
  if (spec_.bc == FluidBc::Example1) return bc_example1(x);
  return bc_example2(x, spec_.length);
}

std::vector<ConstraintChannel> FluidSolidProblem::channels() const {
  return {{"div", {"div_sq"}}, {"volume", {"volume"}}, {"boundary", {"boundary_sq"}}};
}

std::vector<std::string> FluidSolidProblem::multiplier_labels() const {
  return {"p_norm", "lambda1", "lambda2_norm"};
}

// Constraint values reported per channel: mean batch (div u)^2, int phi
// against C_V |D|, and int_{dD} |u - g|^2.
Evaluation FluidSolidProblem::evaluate(const ParamStore& params, const Batches& batches,
                                       std::span<const double> betas, const GradMask& want,
                                       AdjointAccumulator* adjoint) const {
  if (!batches.boundary) throw std::invalid_argument("fluid_solid: boundary batch required");
  if (betas.size() < 3) throw std::invalid_argument("fluid_solid: three beta values required");
  const auto& slots = networks();
  const ResNet& net = slots[0].resnet();
  const auto theta = slots[0].params(params);
  const SampleBatch& batch = batches.interior;
  const BoundaryBatch& edge = *batches.boundary;
  const double w = batch.weight;
  const double eps = spec_.epsilon;
  const double area = domain().volume();

  const NetPass pass = forward_chunked(net, theta, batch.points, true, detail::wanted(want, 0));
  const NetPass p_pass = forward_chunked(slots[1].resnet(), slots[1].params(params), batch.points, false,
                                         detail::wanted(want, 1));
  const NetPass edge_pass = forward_chunked(net, theta, edge.points, false, detail::wanted(want, 0));
  const NetPass l2_pass = forward_chunked(slots[3].resnet(), slots[3].params(params), edge.points, false,
                                          detail::wanted(want, 3));

  const Matrix& out = pass.out.value;
  const Matrix& dx = pass.out.jacobian[0];
  const Matrix& dy = pass.out.jacobian[1];
  const auto u1 = out.row(0).array();
  const auto u2 = out.row(1).array();
  const auto phi = out.row(2).array();
  const auto p = p_pass.out.value.row(0).array();
  const Eigen::ArrayXXd one_minus = 1.0 - phi;
  const Eigen::ArrayXXd speed_sq = u1.square() + u2.square();
  const Eigen::ArrayXXd div = dx.row(0).array() + dy.row(1).array();

  const double grad_u_sq = dx.topRows(2).squaredNorm() + dy.topRows(2).squaredNorm();
  const double grad_phi_sq = dx.row(2).squaredNorm() + dy.row(2).squaredNorm();
  const double brinkman = (one_minus.square() * speed_sq).sum();
  const double well = (0.25 * phi.square() * one_minus.square()).sum();
  const double j_a = w * (0.5 * grad_u_sq + 0.5 * spec_.alpha0 * brinkman);
  const double j_e = w * (0.5 * eps * grad_phi_sq + well / eps);
  const double div_sq = w * div.square().sum();
  const double volume = w * phi.sum();
  const double target = spec_.C_V * area;
  const double r_v = volume - target;
  const double lambda1 = slots[2].scalar().value(slots[2].params(params))(0);

  const Eigen::Index nb = edge.size();
  Matrix g(2, nb);
  Eigen::RowVectorXd wb(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    const Vector xi = edge.points.col(i);
    const auto gi = boundary_data(std::span<const double>(xi.data(), 2));
    g(0, i) = gi[0];
    g(1, i) = gi[1];
    wb(i) = edge.weight_of(i);
  }
  const Matrix mismatch = edge_pass.out.value.topRows(2) - g;
  const Matrix& lambda2 = l2_pass.out.value;
  const double bnd_sq = (mismatch.array().square().colwise().sum() * wb.array()).sum();
  const double bnd_lin = ((lambda2.array() * mismatch.array()).colwise().sum() * wb.array()).sum();

  Evaluation eval;
  eval.objective = spec_.C_alpha * j_a + spec_.C_eps * j_e;
  eval.terms.push_back({"j_alpha", spec_.C_alpha * j_a});
  eval.terms.push_back({"j_eps", spec_.C_eps * j_e});
  eval.terms.push_back({"pressure", -w * (p * div).sum()});
  eval.terms.push_back({"div_penalty", 0.5 * betas[0] * div_sq});
  eval.terms.push_back({"volume_multiplier", -lambda1 * r_v});
  eval.terms.push_back({"volume_penalty", 0.5 * betas[1] * r_v * r_v});
  eval.terms.push_back({"boundary_multiplier", -bnd_lin});
  eval.terms.push_back({"boundary_penalty", 0.5 * betas[2] * bnd_sq});
  detail::finalize_terms(family(), eval);
  eval.constraints.push_back({div_sq / area, 0.0});
  eval.constraints.push_back({volume, target});
  eval.constraints.push_back({bnd_sq, 0.0});
  eval.multipliers.push_back(field_norm(p_pass.out.value, w));
  eval.multipliers.push_back(lambda1);
  eval.multipliers.push_back(std::sqrt((lambda2.array().square().colwise().sum() * wb.array()).sum()));

  if (detail::wanted(want, 0)) {
    const auto grad = detail::grad_of(adjoint, slots[0]);
    const double ca = spec_.C_alpha;
    const double ce = spec_.C_eps;
    const Eigen::ArrayXXd brink = ca * spec_.alpha0 * one_minus.square();
    const Eigen::ArrayXXd div_drive = -p + betas[0] * div;
    BatchJet seed;
    seed.value.resize(3, out.cols());
    seed.value.row(0) = (w * brink * u1).matrix();
    seed.value.row(1) = (w * brink * u2).matrix();
    const Eigen::ArrayXXd well_d = 0.5 * phi * one_minus * (1.0 - 2.0 * phi);
    seed.value.row(2) =
        (w * (-ca * spec_.alpha0 * one_minus * speed_sq + ce / eps * well_d - lambda1 + betas[1] * r_v)).matrix();
    Matrix sx(3, out.cols()), sy(3, out.cols());
    sx.topRows(2) = w * ca * dx.topRows(2);
    sy.topRows(2) = w * ca * dy.topRows(2);
    sx.row(0) += (w * div_drive).matrix();
    sy.row(1) += (w * div_drive).matrix();
    sx.row(2) = w * ce * eps * dx.row(2);
    sy.row(2) = w * ce * eps * dy.row(2);
    seed.jacobian = {std::move(sx), std::move(sy)};
    backward_chunked(net, theta, pass, seed, grad);

    BatchJet edge_seed;
    edge_seed.value = Matrix::Zero(3, nb);
    edge_seed.value.topRows(2) = ((-lambda2.array() + betas[2] * mismatch.array()).rowwise() * wb.array()).matrix();
    backward_chunked(net, theta, edge_pass, edge_seed, grad);
  }
  if (detail::wanted(want, 1)) {
    BatchJet seed;
    seed.value = (-w * div).matrix();
    backward_chunked(slots[1].resnet(), slots[1].params(params), p_pass, seed, detail::grad_of(adjoint, slots[1]));
  }
  if (detail::wanted(want, 2)) {
    slots[2].scalar().backward(slots[2].params(params), Vector::Constant(1, -r_v), detail::grad_of(adjoint, slots[2]));
  }
  if (detail::wanted(want, 3)) {
    BatchJet seed;
    seed.value = (-(mismatch.array().rowwise() * wb.array())).matrix();
    backward_chunked(slots[3].resnet(), slots[3].params(params), l2_pass, seed, detail::grad_of(adjoint, slots[3]));
  }
  return eval;
}

Matrix FluidSolidProblem::grid_values(const ParamStore& params, const Matrix& x) const {
  const auto& slot = networks()[0];
  const Matrix u = forward_chunked(slot.resnet(), slot.params(params), x, false, false).out.value;
  Matrix out(4, u.cols());
  out.topRows(3) = u;
  for (Eigen::Index b = 0; b < u.cols(); ++b) out(3, b) = threshold_projection(u(2, b));
  return out;
}

}  // namespace wanco
