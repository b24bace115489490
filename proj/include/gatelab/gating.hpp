#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gatelab {

struct StepGate {
  double threshold;
};

// Logistic approval centred at `center` with width `temperature`.
struct SigmoidGate {
  double center;
  double temperature;
};

// q(r) = intercept + slope * r.
struct AffineGate {
  double intercept;
  double slope;
};

// Linear interpolation between knots (x, q), constant beyond the end knots.
struct PiecewiseLinearGate {
  std::vector<std::pair<double, double>> knots;
};

class NonDifferentiableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class Gate {
 public:
  using Variant = std::variant<StepGate, SigmoidGate, AffineGate, PiecewiseLinearGate>;

  static Gate step(double threshold);
  static Gate sigmoid(double center, double temperature);
  static Gate affine(double intercept, double slope);
  static Gate piecewise(std::vector<std::pair<double, double>> knots);

  const Variant& kind() const { return v_; }
  std::string describe() const;

 private:
  explicit Gate(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

double approve_prob(const Gate& g, double r);
double gate_derivative(const Gate& g, double r);
// inf{r in [0,1] : q(r) > 0}; +infinity when the gate never approves.
double effective_threshold(const Gate& g);
// The cut the gate is meant to implement: r_min for step and sigmoid gates,
// the effective threshold otherwise.
double nominal_threshold(const Gate& g);

struct GateStructure {
  bool monotone = true;
  bool affine = false;
  bool constant = false;
};

GateStructure structure_flags(const Gate& g);

}  // namespace gatelab
