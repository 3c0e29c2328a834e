#include "wanco/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace wanco {

ActivationTriple activate(Activation kind, double t) {
  switch (kind) {
    case Activation::Tanh3: {
      const double th = std::tanh(t);
      const double s = 1.0 - th * th;
      return {th * th * th, 3.0 * th * th * s, 6.0 * th * s * (1.0 - 2.0 * th * th)};
    }
    case Activation::Tanh: {
      const double th = std::tanh(t);
      const double s = 1.0 - th * th;
      return {th, s, -2.0 * th * s};
    }
    case Activation::Sigmoid: {
      const double sg = 1.0 / (1.0 + std::exp(-t));
      const double d = sg * (1.0 - sg);
      return {sg, d, d * (1.0 - 2.0 * sg)};
    }
    case Activation::Relu:
      // Subgradient 0 at the kink.
      return t > 0.0 ? ActivationTriple{t, 1.0, 0.0} : ActivationTriple{0.0, 0.0, 0.0};
    case Activation::Relu3: {
      const double r = t > 0.0 ? t : 0.0;
      return {r * r * r, 3.0 * r * r, 6.0 * r};
    }
  }
  throw std::invalid_argument("unknown activation");
}

void activate(Activation kind, const Eigen::MatrixXd& z, Eigen::MatrixXd& value, Eigen::MatrixXd& d1,
              Eigen::MatrixXd* d2) {
  const auto za = z.array();
  switch (kind) {
    case Activation::Tanh3: {
      const Eigen::ArrayXXd th = za.tanh();
      const Eigen::ArrayXXd th2 = th.square();
      const Eigen::ArrayXXd s = 1.0 - th2;
      value = (th2 * th).matrix();
      d1 = (3.0 * th2 * s).matrix();
      if (d2) *d2 = (6.0 * th * s * (1.0 - 2.0 * th2)).matrix();
      return;
    }
    case Activation::Tanh: {
      const Eigen::ArrayXXd th = za.tanh();
      const Eigen::ArrayXXd s = 1.0 - th.square();
      value = th.matrix();
      d1 = s.matrix();
      if (d2) *d2 = (-2.0 * th * s).matrix();
      return;
    }
    case Activation::Sigmoid: {
      const Eigen::ArrayXXd sg = 1.0 / (1.0 + (-za).exp());
      const Eigen::ArrayXXd d = sg * (1.0 - sg);
      value = sg.matrix();
      d1 = d.matrix();
      if (d2) *d2 = (d * (1.0 - 2.0 * sg)).matrix();
      return;
    }
    case Activation::Relu: {
      value = za.max(0.0).matrix();
      d1 = (za > 0.0).cast<double>().matrix();
      if (d2) d2->setZero(z.rows(), z.cols());
      return;
    }
    case Activation::Relu3: {
      const Eigen::ArrayXXd r = za.max(0.0);
      value = r.cube().matrix();
      d1 = (3.0 * r.square()).matrix();
      if (d2) *d2 = (6.0 * r).matrix();
      return;
    }
  }
  throw std::invalid_argument("unknown activation");
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh3") return Activation::Tanh3;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "relu") return Activation::Relu;
  if (name == "relu3") return Activation::Relu3;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Tanh3: return "tanh3";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
    case Activation::Relu3: return "relu3";
  }
  return "?";
}

}  // namespace wanco
