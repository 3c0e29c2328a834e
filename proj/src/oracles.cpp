#include "wanco/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wanco {

Grid1D obstacle_psor(std::span<const double> psi, double g0, double g1, const PsorOptions& options) {
  const int n = static_cast<int>(psi.size());
  if (n < 3) throw std::invalid_argument("obstacle_psor: need at least 3 nodes");
  if (!(options.omega > 1.0 && options.omega < 2.0)) throw std::invalid_argument("obstacle_psor: omega must lie in (1, 2)");
  if (!(options.tol > 0.0)) throw std::invalid_argument("obstacle_psor: tol must be > 0");
  Grid1D grid{n, std::vector<double>(static_cast<std::size_t>(n))};
  auto& u = grid.values;
  u.front() = g0;
  u.back() = g1;
  for (int i = 1; i < n - 1; ++i) {
    const double t = grid.x(i);
    u[i] = std::max((1.0 - t) * g0 + t * g1, psi[i]);
  }
  for (long sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 1; i < n - 1; ++i) {
      const double gs = 0.5 * (u[i - 1] + u[i + 1]);
      const double next = std::max(psi[i], u[i] + options.omega * (gs - u[i]));
      change = std::max(change, std::abs(next - u[i]));
      u[i] = next;
    }
    if (change < options.tol) return grid;
  }
  throw std::runtime_error("obstacle_psor: no convergence within the sweep cap");
}

double complementarity_residual(const Grid1D& u, std::span<const double> psi) {
  const double h2 = u.h() * u.h();
  double worst = 0.0;
  for (int i = 1; i < u.n - 1; ++i) {
    const double lap = -(u.values[i - 1] - 2.0 * u.values[i] + u.values[i + 1]) / h2;
    worst = std::max(worst, std::abs(std::min(lap, u.values[i] - psi[i])));
  }
  return worst;
}

double gl_sharp_interface_radius(double V) {
  if (!(V > -1.0 && V < 1.0)) throw std::invalid_argument("gl_sharp_interface_radius: V must lie in (-1, 1)");
  return std::sqrt(0.5 * (V + 1.0) / std::numbers::pi);
}

namespace {

double simpson_weight(int i, int n) {
  if (i == 0 || i == n - 1) return 1.0;
  return i % 2 == 1 ? 4.0 : 2.0;
}

void check_nodes(std::span<const int> nodes, const Box& box) {
  box.validate();
  if (static_cast<int>(nodes.size()) != box.dim()) throw std::invalid_argument("quadrature_reference: one node count per axis");
  for (int n : nodes) {
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("quadrature_reference: node counts must be odd and >= 3");
  }
}

}  // namespace

double quadrature_reference(std::span<const double> values, std::span<const int> nodes, const Box& box) {
  check_nodes(nodes, box);
  std::size_t total = 1;
  for (int n : nodes) total *= static_cast<std::size_t>(n);
  if (values.size() != total) throw std::invalid_argument("quadrature_reference: value count does not match the grid");
  const int d = box.dim();
  double scale = 1.0;
  for (int k = 0; k < d; ++k) scale *= (box.hi[k] - box.lo[k]) / (nodes[k] - 1) / 3.0;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) w *= simpson_weight(idx[k], nodes[k]);
    sum += w * values[flat];
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < nodes[k]) break;
      idx[k] = 0;
    }
  }
  return sum * scale;
}

double quadrature_reference(const std::function<double(std::span<const double>)>& f, std::span<const int> nodes,
                            const Box& box) {
  check_nodes(nodes, box);
  const int d = box.dim();
  std::size_t total = 1;
  for (int n : nodes) total *= static_cast<std::size_t>(n);
  std::vector<double> values(total);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int k = 0; k < d; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * idx[k] / (nodes[k] - 1);
    values[flat] = f(x);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < nodes[k]) break;
      idx[k] = 0;
    }
  }
  return quadrature_reference(values, nodes, box);
}

}  // namespace wanco
