#include <doctest.h>

#include "wanco/activation.hpp"

#include <cmath>

using namespace wanco;

TEST_CASE("tanh3 reference values") {
  const auto a = activate(Activation::Tanh3, 1.5);
  CHECK(a.value == doctest::Approx(0.7415820).epsilon(1e-6));
  CHECK(a.d1 == doctest::Approx(0.444155).epsilon(1e-5));
  const auto z = activate(Activation::Tanh3, 0.0);
  CHECK(z.value == 0.0);
  CHECK(z.d1 == 0.0);
  CHECK(z.d2 == 0.0);
}

TEST_CASE("derivatives match finite differences") {
  const double h = 1e-5;
  for (Activation kind : kAllActivations) {
    for (double t : {-1.3, -0.4, 0.35, 0.9, 2.1}) {
      const auto a = activate(kind, t);
      const auto p = activate(kind, t + h);
      const auto m = activate(kind, t - h);
      CAPTURE(to_string(kind));
      CAPTURE(t);
      CHECK(a.d1 == doctest::Approx((p.value - m.value) / (2 * h)).epsilon(1e-6));
      CHECK(a.d2 == doctest::Approx((p.d1 - m.d1) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("batched evaluation agrees with the scalar form") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Random(3, 4) * 2.0;
  for (Activation kind : kAllActivations) {
    Eigen::MatrixXd v, d1, d2;
    activate(kind, z, v, d1, &d2);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const auto a = activate(kind, z(i));
      CHECK(v(i) == doctest::Approx(a.value));
      CHECK(d1(i) == doctest::Approx(a.d1));
      CHECK(d2(i) == doctest::Approx(a.d2));
    }
  }
}

TEST_CASE("names round trip") {
  for (Activation kind : kAllActivations) CHECK(parse_activation(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_activation("softmax"), std::invalid_argument);
}
