#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gatelab/gating.hpp"

using namespace gatelab;
using doctest::Approx;

namespace {
double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

TEST_CASE("step gate is closed at the threshold") {
  const auto g = Gate::step(0.7);
  CHECK(approve_prob(g, 0.7) == 1.0);
  CHECK(approve_prob(g, 0.69) == 0.0);
  for (int i = 0; i <= 1000; ++i) {
    const double r = i / 1000.0;
    CHECK(approve_prob(g, r) == (r >= 0.7 ? 1.0 : 0.0));
  }
  for (int k = 0; k <= 20; ++k) {
    const auto t = Gate::step(k / 20.0);
    CHECK(approve_prob(t, k / 20.0) == 1.0);
  }
}

TEST_CASE("sigmoid gate") {
  const auto g = Gate::sigmoid(0.7, 0.1);
  CHECK(approve_prob(g, 0.7) == Approx(0.5));
  CHECK(gate_derivative(g, 0.7) == Approx(2.5));
  const double s = logistic(-2.0);
  CHECK(gate_derivative(g, 0.5) == Approx(s * (1 - s) / 0.1));
  CHECK(gate_derivative(g, 0.5) == Approx(1.0499).epsilon(1e-4));
  CHECK_THROWS_AS(Gate::sigmoid(0.7, 0.0), std::invalid_argument);
}

TEST_CASE("affine gate") {
  const auto g = Gate::affine(0.1, 0.5);
  for (double r : {0.0, 0.3, 1.0}) CHECK(gate_derivative(g, r) == 0.5);
  CHECK(approve_prob(g, 0.4) == Approx(0.3));
  CHECK_THROWS_AS(Gate::affine(0.5, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(Gate::affine(0.6, 0.5), std::invalid_argument);
}

TEST_CASE("derivatives where none exist") {
  CHECK_THROWS_AS(gate_derivative(Gate::step(0.7), 0.3), NonDifferentiableError);
  const auto pw = Gate::piecewise({{0.0, 0.0}, {0.4, 0.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(gate_derivative(pw, 0.4), NonDifferentiableError);
  CHECK(gate_derivative(pw, 0.7) == Approx(1.0 / 0.6));
  CHECK(gate_derivative(pw, 0.2) == 0.0);
}

TEST_CASE("effective threshold") {
  CHECK(effective_threshold(Gate::step(0.7)) == 0.7);
  CHECK(effective_threshold(Gate::sigmoid(0.7, 0.1)) == 0.0);
  CHECK(effective_threshold(Gate::affine(0.2, 0.3)) == 0.0);
  CHECK(effective_threshold(Gate::affine(0.0, 0.3)) == 0.0);
  CHECK(effective_threshold(Gate::piecewise({{0.0, 0.0}, {0.4, 0.0}, {1.0, 1.0}})) == Approx(0.4));
  CHECK(std::isinf(effective_threshold(Gate::affine(0.0, 0.0))));
  CHECK(nominal_threshold(Gate::sigmoid(0.7, 0.1)) == 0.7);
  CHECK(nominal_threshold(Gate::step(0.6)) == 0.6);
}

TEST_CASE("structure flags") {
  auto f = structure_flags(Gate::step(0.7));
  CHECK(f.monotone);
  CHECK_FALSE(f.affine);
  CHECK_FALSE(f.constant);
  f = structure_flags(Gate::affine(0.2, 0.0));
  CHECK(f.monotone);
  CHECK(f.affine);
  CHECK(f.constant);
  f = structure_flags(Gate::sigmoid(0.7, 0.1));
  CHECK(f.monotone);
  CHECK_FALSE(f.affine);
  CHECK_FALSE(f.constant);
  CHECK(structure_flags(Gate::piecewise({{0.0, 0.2}, {1.0, 0.8}})).affine);
  CHECK(structure_flags(Gate::piecewise({{0.0, 0.5}, {1.0, 0.5}})).constant);
  CHECK_FALSE(structure_flags(Gate::piecewise({{0.0, 0.0}, {0.5, 0.1}, {1.0, 1.0}})).affine);
}

TEST_CASE("gates are monotone and bounded on a fine grid") {
  const std::vector<Gate> gates{Gate::step(0.5), Gate::sigmoid(0.6, 0.05), Gate::affine(0.1, 0.9),
                                Gate::piecewise({{0.2, 0.0}, {0.6, 0.3}, {0.8, 1.0}})};
  for (const auto& g : gates) {
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double q = approve_prob(g, i / 1000.0);
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("analytic derivative matches central differences") {
  const std::vector<Gate> gates{Gate::sigmoid(0.6, 0.05), Gate::sigmoid(0.3, 0.2), Gate::affine(0.1, 0.9),
                                Gate::piecewise({{0.2, 0.0}, {0.6, 0.3}, {0.8, 1.0}})};
  const double h = 1e-6;
  for (const auto& g : gates)
    for (double r : {0.13, 0.41, 0.55, 0.72, 0.9}) {
      const double fd = (approve_prob(g, r + h) - approve_prob(g, r - h)) / (2 * h);
      const double d = gate_derivative(g, r);
      CHECK(std::abs(fd - d) <= 1e-6 * std::max(1.0, std::abs(d)));
    }
}

TEST_CASE("piecewise gate extends its end knots") {
  const auto g = Gate::piecewise({{0.2, 0.1}, {0.8, 0.9}});
  CHECK(approve_prob(g, 0.0) == Approx(0.1));
  CHECK(approve_prob(g, 1.0) == Approx(0.9));
  CHECK(approve_prob(g, 0.5) == Approx(0.5));
  CHECK_THROWS_AS(Gate::piecewise({{0.0, 0.5}, {1.0, 0.2}}), std::invalid_argument);
}
