#include "gatelab/gating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gatelab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool collinear(const std::vector<std::pair<double, double>>& k) {
  if (k.size() < 3) return true;
  const double slope = (k[1].second - k[0].second) / (k[1].first - k[0].first);
  for (std::size_t i = 2; i < k.size(); ++i) {
    const double s = (k[i].second - k[i - 1].second) / (k[i].first - k[i - 1].first);
    if (std::abs(s - slope) > 1e-12) return false;
  }
  return true;
}

}  // namespace

Gate Gate::step(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("step threshold must lie in [0,1]");
  return Gate(StepGate{threshold});
}

Gate Gate::sigmoid(double center, double temperature) {
  if (!std::isfinite(center)) throw std::invalid_argument("sigmoid center must be finite");
  if (!(temperature > 0.0)) throw std::invalid_argument("sigmoid temperature must be positive");
  return Gate(SigmoidGate{center, temperature});
}

Gate Gate::affine(double intercept, double slope) {
  if (slope < 0.0) throw std::invalid_argument("affine gate slope must be non-negative");
  if (intercept < 0.0 || intercept + slope > 1.0 + 1e-12)
    throw std::invalid_argument("affine gate must map [0,1] into [0,1]");
  return Gate(AffineGate{intercept, slope});
}

Gate Gate::piecewise(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw std::invalid_argument("piecewise gate needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [x, q] = knots[i];
    if (!(x >= 0.0 && x <= 1.0 && q >= 0.0 && q <= 1.0))
      throw std::invalid_argument("piecewise knots must lie in [0,1]x[0,1]");
    if (i > 0) {
      if (!(x > knots[i - 1].first))
        throw std::invalid_argument("piecewise knot positions must be strictly increasing");
      if (q < knots[i - 1].second)
        throw std::invalid_argument("piecewise gate must be non-decreasing");
    }
  }
  return Gate(PiecewiseLinearGate{std::move(knots)});
}

std::string Gate::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const StepGate& s) { os << "step(" << s.threshold << ")"; },
                 [&](const SigmoidGate& s) {
                   os << "sigmoid(" << s.center << ", " << s.temperature << ")";
                 },
                 [&](const AffineGate& a) { os << "affine(" << a.intercept << ", " << a.slope << ")"; },
                 [&](const PiecewiseLinearGate& p) { os << "piecewise(" << p.knots.size() << " knots)"; },
             },
             v_);
  return os.str();
}

double approve_prob(const Gate& g, double r) {
  return std::visit(
      overloaded{
          [&](const StepGate& s) { return r >= s.threshold ? 1.0 : 0.0; },
          [&](const SigmoidGate& s) { return logistic((r - s.center) / s.temperature); },
          [&](const AffineGate& a) { return std::clamp(a.intercept + a.slope * r, 0.0, 1.0); },
          [&](const PiecewiseLinearGate& p) {
            const auto& k = p.knots;
            if (r <= k.front().first) return k.front().second;
            if (r >= k.back().first) return k.back().second;
            auto hi = std::upper_bound(k.begin(), k.end(), r,
                                       [](double v, const auto& knot) { return v < knot.first; });
            auto lo = hi - 1;
            const double t = (r - lo->first) / (hi->first - lo->first);
            return lo->second + t * (hi->second - lo->second);
          },
      },
      g.kind());
}

double gate_derivative(const Gate& g, double r) {
  return std::visit(
      overloaded{
          [&](const StepGate&) -> double {
            throw NonDifferentiableError("step gate has no derivative");
          },
          [&](const SigmoidGate& s) {
            const double q = logistic((r - s.center) / s.temperature);
            return q * (1.0 - q) / s.temperature;
          },
          [&](const AffineGate& a) { return a.slope; },
          [&](const PiecewiseLinearGate& p) -> double {
            const auto& k = p.knots;
            for (const auto& knot : k)
              if (r == knot.first) throw NonDifferentiableError("piecewise gate is not smooth at a knot");
            if (r < k.front().first || r > k.back().first) return 0.0;
            auto hi = std::upper_bound(k.begin(), k.end(), r,
                                       [](double v, const auto& knot) { return v < knot.first; });
            auto lo = hi - 1;
            return (hi->second - lo->second) / (hi->first - lo->first);
          },
      },
      g.kind());
}

double effective_threshold(const Gate& g) {
  constexpr double never = std::numeric_limits<double>::infinity();
  return std::visit(overloaded{
                        [](const StepGate& s) { return s.threshold; },
                        [](const SigmoidGate&) { return 0.0; },
                        [&](const AffineGate& a) { return (a.intercept > 0 || a.slope > 0) ? 0.0 : never; },
                        [](const PiecewiseLinearGate& p) {
                          const auto& k = p.knots;
                          if (k.front().second > 0) return 0.0;
                          for (std::size_t i = 1; i < k.size(); ++i)
                            if (k[i].second > 0) return k[i - 1].first;
                          return never;
                        },
                    },
                    g.kind());
}

double nominal_threshold(const Gate& g) {
  if (const auto* s = std::get_if<StepGate>(&g.kind())) return s->threshold;
  if (const auto* s = std::get_if<SigmoidGate>(&g.kind())) return s->center;
  return effective_threshold(g);
}

GateStructure structure_flags(const Gate& g) {
  return std::visit(overloaded{
                        [](const StepGate& s) {
                          const bool flat = s.threshold <= 0.0;
                          return GateStructure{true, flat, flat};
                        },
                        [](const SigmoidGate&) { return GateStructure{true, false, false}; },
                        [](const AffineGate& a) { return GateStructure{true, true, a.slope == 0.0}; },
                        [](const PiecewiseLinearGate& p) {
                          const auto& k = p.knots;
                          const bool flat = k.front().second == k.back().second;
                          const bool spans = k.front().first <= 0.0 && k.back().first >= 1.0;
                          return GateStructure{true, flat || (collinear(k) && spans), flat};
                        },
                    },
                    g.kind());
}

}  // namespace gatelab
