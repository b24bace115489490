#include "gatelab/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

namespace gatelab {

namespace {

// Payoff differences below this are treated as indifference, so exact ties in
// real arithmetic are not split by rounding.
constexpr double kTieTolerance = 1e-12;

void validate(const BestResponseInput& in) {
  if (!(in.p_star >= 0 && in.p_star <= 1)) throw std::invalid_argument("p* must lie in [0,1]");
  if (!(in.R_star >= 0 && in.R_star <= 1)) throw std::invalid_argument("R* must lie in [0,1]");
  if (!(in.w_C > 0)) throw std::invalid_argument("w_C must be positive");
  if (!(in.w_A >= 0)) throw std::invalid_argument("w_A must be non-negative");
}

}  // namespace

double report_payoff(const BestResponseInput& in, double r) {
  return in.w_C * expected_score(in.rule, in.rule.clip_report(r), in.p_star) +
         in.w_A * approve_prob(in.gate, r) * in.R_star;
}

double closed_form_report(const BestResponseInput& in) {
  validate(in);
  const double p = in.rule.clip_report(in.p_star);
  const double slope = gate_derivative(in.gate, in.p_star);
  const double r = in.p_star + in.w_A * in.R_star * slope / (in.w_C * in.rule.g2(p));
  return std::clamp(r, 0.0, 1.0);
}

bool inflation_condition(double p_star, double r_min, double w_C, double w_A, double R_star) {
  if (p_star >= r_min) throw std::invalid_argument("inflation condition needs a binding type (p* < r_min)");
  const double gap = r_min - p_star;
  return w_A * R_star - w_C * gap * gap > kTieTolerance;
}

NumericBestReport numeric_best_report(const BestResponseInput& in, double grid_step) {
  validate(in);
  if (!(grid_step > 0.0 && grid_step <= 0.01)) throw std::invalid_argument("grid_step must lie in (0, 0.01]");
  const auto n = static_cast<long>(std::ceil(1.0 / grid_step - 1e-9));

  double best_r = 0.0;
  double best_v = -INFINITY;
  auto consider = [&](double r) {
    const double v = report_payoff(in, r);
    if (v > best_v + kTieTolerance || (v >= best_v - kTieTolerance && r < best_r)) {
      best_v = v;
      best_r = r;
    }
  };

  if (const auto* step = std::get_if<StepGate>(&in.gate.kind())) {
    // Rejected branch peaks at p* (or at the last rejected report below r_min);
    // the approved branch is searched from r_min upward.
    consider(in.p_star);
    const double t = step->threshold;
    consider(t);
    for (long i = static_cast<long>(std::ceil(t * n)); i <= n; ++i) {
      const double r = static_cast<double>(i) / n;
      if (r >= t) consider(r);
    }
  } else {
    for (long i = 0; i <= n; ++i) consider(static_cast<double>(i) / n);
  }
  return {best_r, best_v, best_r > in.p_star + grid_step};
}

std::int64_t detection_sample_size(double delta, double alpha_sig) {
  if (!(delta > 0 && delta <= 1)) throw std::invalid_argument("delta must lie in (0,1]");
  if (!(alpha_sig > 0 && alpha_sig < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
  return static_cast<std::int64_t>(std::ceil(std::log(2.0 / alpha_sig) / (2.0 * delta * delta)));
}

bool inflation_detected(double reported, std::span<const int> outcomes, double delta) {
  if (outcomes.empty()) throw std::invalid_argument("detector needs at least one outcome");
  double hits = 0;
  for (int y : outcomes) hits += y;
  return reported - hits / static_cast<double>(outcomes.size()) >= delta / 2.0;
}

}  // namespace gatelab
