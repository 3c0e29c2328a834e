#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <string_view>

namespace wanco {

enum class Activation { Tanh3, Tanh, Sigmoid, Relu, Relu3 };

inline constexpr std::array<Activation, 5> kAllActivations{
    Activation::Tanh3, Activation::Tanh, Activation::Sigmoid, Activation::Relu, Activation::Relu3};

/// Value, first and second derivative at one point.
struct ActivationTriple {
  double value;
  double d1;
  double d2;
};

ActivationTriple activate(Activation kind, double t);

/// Elementwise over a matrix. d2 may be null when the caller only needs
/// first-order information.
void activate(Activation kind, const Eigen::MatrixXd& z, Eigen::MatrixXd& value, Eigen::MatrixXd& d1,
              Eigen::MatrixXd* d2);

/// Accepts "tanh3", "tanh", "sigmoid", "relu", "relu3". Throws on anything else.
Activation parse_activation(std::string_view name);
std::string_view to_string(Activation kind);

}  // namespace wanco
