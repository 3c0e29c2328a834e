#include <doctest.h>

#include "wanco/diffcore.hpp"
#include "wanco/netarch.hpp"

#include <cmath>
#include <limits>

using namespace wanco;

namespace {

ParamStore net_store(const ResNet& net, std::uint64_t seed) {
  ParamStore store;
  declare_segments(store, "u", net.layout());
  net.init_params(store.values(), seed);
  return store;
}

}  // namespace

TEST_CASE("param store segments tile the vector") {
  ParamStore s;
  CHECK(s.append("a", 3) == 0);
  CHECK(s.append("b", 2) == 3);
  CHECK(s.size() == 5);
  CHECK(s.segment_at(4).name == "b");
  CHECK(s.find("a")->length == 3);
  CHECK(s.find("zz") == nullptr);
  CHECK_THROWS_AS(s.append("a", 1), std::invalid_argument);
  CHECK_NOTHROW(s.check_invariants());
  s.values()[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.check_invariants(), NonFiniteError);
}

TEST_CASE("backprop of a plain quadratic") {
  ParamStore s;
  s.append("p", 2);
  s.values()[0] = 1.0;
  s.values()[1] = 2.0;
  LossFunction loss = [](const ParamStore& ps, AdjointAccumulator* adj) {
    const auto v = ps.values();
    if (adj) {
      adj->grad()[0] += 2.0 * v[0];
      adj->grad()[1] += 2.0 * v[1];
    }
    return v[0] * v[0] + v[1] * v[1];
  };
  const auto acc = backprop_loss(loss, s);
  CHECK(acc.grad()[0] == doctest::Approx(2.0));
  CHECK(acc.grad()[1] == doctest::Approx(4.0));
  const auto fd = finite_diff_grad([&](const ParamStore& ps) { return loss(ps, nullptr); }, s, 1e-5);
  CHECK(fd[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fd[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("finite differences of a constant are zero") {
  ParamStore s;
  s.append("p", 4);
  const auto fd = finite_diff_grad([](const ParamStore&) { return 3.0; }, s, 1e-5);
  for (double g : fd) CHECK(g == 0.0);
  CHECK_THROWS_AS(finite_diff_grad([](const ParamStore&) { return 3.0; }, s, 0.0), std::invalid_argument);
}

TEST_CASE("backprop names the segment with a non-finite gradient") {
  ParamStore s;
  s.append("first", 1);
  s.append("second", 1);
  LossFunction loss = [](const ParamStore&, AdjointAccumulator* adj) {
    if (adj) adj->grad()[1] = std::numeric_limits<double>::infinity();
    return 1.0;
  };
  try {
    backprop_loss(loss, s);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(std::string(e.what()).find("second") != std::string::npos);
  }
}

TEST_CASE("linear network value and jacobian") {
  // W_in = [[2]], the residual block contributes phi(0) = 0, W_out = [[1]].
  ResNet net({1, 1, 1, 1, Activation::Tanh3});
  ParamStore s;
  declare_segments(s, "u", net.layout());
  s.values()[0] = 2.0;                 // W_in
  s.values()[s.size() - 2] = 1.0;      // W_out
  const double x[] = {3.0};
  const SpatialJet jet = net.eval_with_input_grad(s.values(), x);
  CHECK(jet.value(0) == doctest::Approx(6.0));
  CHECK(jet.jacobian(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("tanh3 neuron at the origin") {
  ResNet net({1, 1, 1, 1, Activation::Tanh3});
  ParamStore s;
  declare_segments(s, "u", net.layout());
  for (auto& v : s.values()) v = 1.0;
  s.values()[1] = 0.0;  // b_in
  s.values()[3] = 0.0;  // b_1
  s.values()[5] = 0.0;  // b_out
  const double x[] = {0.0};
  const SpatialJet jet = net.eval_with_input_grad(s.values(), x);
  CHECK(jet.value(0) == doctest::Approx(0.0));
  CHECK(jet.jacobian(0, 0) == doctest::Approx(1.0));  // residual path carries W_in * W_out
}

TEST_CASE("zero weights: only the output bias gets gradient from mean u^2") {
  ResNet net({2, 1, 1, 3, Activation::Tanh3});
  ParamStore s;
  declare_segments(s, "u", net.layout());
  s.values()[s.size() - 1] = 0.5;  // b_out
  Matrix x = Matrix::Random(2, 16);
  LossFunction loss = [&](const ParamStore& ps, AdjointAccumulator* adj) {
    ResNet::Cache cache;
    const BatchJet out = net.forward(ps.values(), x, false, adj ? &cache : nullptr);
    const double w = 1.0 / 16.0;
    if (adj) {
      BatchJet seed;
      seed.value = 2.0 * w * out.value;
      net.backward(ps.values(), cache, seed, adj->grad());
    }
    return w * out.value.squaredNorm();
  };
  const auto acc = backprop_loss(loss, s);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(acc.grad()[i] == 0.0);
  CHECK(acc.grad()[s.size() - 1] == doctest::Approx(1.0));
}

TEST_CASE("gradient of a |grad u|^2 loss matches finite differences") {
  ResNet net({2, 1, 2, 8, Activation::Tanh3});
  ParamStore s = net_store(net, 11);
  for (std::size_t i = 0; i < s.size(); ++i) s.values()[i] += 0.1 * std::sin(0.7 * i);
  Matrix x = 0.5 * (Matrix::Random(2, 64).array() + 1.0);
  LossFunction loss = [&](const ParamStore& ps, AdjointAccumulator* adj) {
    ResNet::Cache cache;
    const BatchJet out = net.forward(ps.values(), x, true, adj ? &cache : nullptr);
    const double w = 1.0 / 64.0;
    double l = 0.0;
    for (const auto& j : out.jacobian) l += j.squaredNorm();
    l = w * (l + out.value.array().pow(4).sum());
    if (adj) {
      BatchJet seed;
      seed.value = 4.0 * w * out.value.array().pow(3).matrix();
      for (const auto& j : out.jacobian) seed.jacobian.push_back(2.0 * w * j);
      net.backward(ps.values(), cache, seed, adj->grad());
    }
    return l;
  };
  const auto acc = backprop_loss(loss, s);
  const auto fd = finite_diff_grad([&](const ParamStore& ps) { return loss(ps, nullptr); }, s, 1e-5);
  CHECK(relative_l2(acc.grad(), fd) < 1e-4);
}

TEST_CASE("gradient is linear in the loss") {
  ResNet net({2, 1, 1, 5, Activation::Tanh});
  ParamStore s = net_store(net, 3);
  Matrix x = Matrix::Random(2, 10);
  auto make = [&](double a, double b) {
    return LossFunction([&, a, b](const ParamStore& ps, AdjointAccumulator* adj) {
      ResNet::Cache cache;
      const BatchJet out = net.forward(ps.values(), x, false, adj ? &cache : nullptr);
      if (adj) {
        BatchJet seed;
        seed.value = (2.0 * a * out.value.array() + b).matrix();
        net.backward(ps.values(), cache, seed, adj->grad());
      }
      return a * out.value.squaredNorm() + b * out.value.sum();
    });
  };
  const auto g1 = backprop_loss(make(1.0, 0.0), s);
  const auto g2 = backprop_loss(make(0.0, 1.0), s);
  const auto g12 = backprop_loss(make(2.0, -3.0), s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(g12.grad()[i] == doctest::Approx(2.0 * g1.grad()[i] - 3.0 * g2.grad()[i]).epsilon(1e-12));
  }
}

TEST_CASE("relative_l2") {
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0}, c{0.0, 0.0};
  CHECK(relative_l2(a, b) == 0.0);
  CHECK(relative_l2(c, b) == doctest::Approx(1.0));
}
