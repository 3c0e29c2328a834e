#pragma once

#include "wanco/sampling.hpp"

#include <functional>
#include <span>
#include <vector>

namespace wanco {

/// Nodal values on [0,1] with spacing 1/(n-1).
struct Grid1D {
  int n = 0;
  std::vector<double> values;
  double h() const { return 1.0 / (n - 1); }
  double x(int i) const { return i * h(); }
};

struct PsorOptions {
  double omega = 1.9;
  double tol = 1e-10;
  long max_sweeps = 50'000'000;
};

/// Projected SOR for -u'' = 0, u >= psi, u(0) = g0, u(1) = g1 on n nodes.
/// psi holds the obstacle at every node (endpoints included). Throws
/// std::runtime_error if the sweep cap is hit.
Grid1D obstacle_psor(std::span<const double> psi, double g0, double g1, const PsorOptions& options = {});

/// max_i |min(-(u_{i-1} - 2u_i + u_{i+1}) / h^2, u_i - psi_i)| over interior nodes.
double complementarity_residual(const Grid1D& u, std::span<const double> psi);

/// Radius of the disc of phase +1 whose mass balance 2A - 1 = V holds in the unit square.
double gl_sharp_interface_radius(double V);

/// Composite Simpson on a tensor grid. `values` is row-major with the first
/// axis slowest; every axis needs an odd node count >= 3.
double quadrature_reference(std::span<const double> values, std::span<const int> nodes, const Box& box);

/// Samples f on the Simpson grid and integrates.
double quadrature_reference(const std::function<double(std::span<const double>)>& f, std::span<const int> nodes,
                            const Box& box);

}  // namespace wanco
