#include "gatelab/principal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>

#include "gatelab/best_response.hpp"
#include "kernels/kernels.hpp"

namespace gatelab {

namespace {

constexpr double kTie = 1e-12;

// Agent's calibration loss from reporting r instead of the truth p.
double misreport_loss(const PrincipalSpec& spec, double r, double p) {
  const auto& rule = spec.rule;
  return spec.w_C * (expected_score(rule, rule.clip_report(p), p) - expected_score(rule, rule.clip_report(r), p));
}

}  // namespace

TypeDistribution::TypeDistribution(std::vector<double> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty() || support_.size() != weights_.size())
    throw std::invalid_argument("type distribution needs one weight per support point");
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!(support_[i] >= 0 && support_[i] <= 1)) throw std::invalid_argument("types must lie in [0,1]");
    if (!(weights_[i] >= 0)) throw std::invalid_argument("type weights must be non-negative");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("type weights must sum to 1");
}

TypeDistribution TypeDistribution::uniform_nodes(std::size_t n) {
  if (n < 2) throw std::invalid_argument("uniform grid needs at least two nodes");
  std::vector<double> s(n), w(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return TypeDistribution(std::move(s), std::move(w));
}

void validate(const PrincipalSpec& spec) {
  if (!(spec.p_min > 0 && spec.p_min < 1)) throw std::invalid_argument("p_min must lie in (0,1)");
  if (!(spec.cost > 0)) throw std::invalid_argument("cost must be positive");
  if (!(spec.w_C > 0)) throw std::invalid_argument("w_C must be positive");
  if (!(spec.w_A >= 0)) throw std::invalid_argument("w_A must be non-negative");
  if (!(spec.R_star >= 0 && spec.R_star <= 1)) throw std::invalid_argument("R* must lie in [0,1]");
}

OptimalThreshold optimal_threshold(const PrincipalSpec& spec) {
  validate(spec);
  const double gap = 1.0 - spec.p_min;
  if (spec.ratio() > gap * gap) return {true, std::nullopt};
  return {false, spec.p_min + std::sqrt(spec.ratio())};
}

std::vector<ScreeningEntry> induced_screening(const PrincipalSpec& spec, double r0, std::span<const double> p_grid) {
  validate(spec);
  if (!(r0 >= 0 && r0 <= 1)) throw std::invalid_argument("threshold must lie in [0,1]");
  const double bonus = spec.w_A * spec.R_star;
  std::vector<ScreeningEntry> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) {
    if (p >= r0) {
      out.push_back({p, p, true});
    } else if (bonus >= misreport_loss(spec, r0, p) - kTie) {
      out.push_back({p, r0, true});
    } else {
      out.push_back({p, p, false});
    }
  }
  return out;
}

bool first_best_check(const PrincipalSpec& spec, double r0, std::span<const double> p_grid) {
  for (const auto& e : induced_screening(spec, r0, p_grid))
    if (e.approved != (e.type >= spec.p_min)) return false;
  return true;
}

double saturated_welfare_loss(const PrincipalSpec& spec, const TypeDistribution& F) {
  if (!optimal_threshold(spec).saturated)
    throw RegimeError("saturated welfare loss is defined only when w_A R*/w_C > (1 - p_min)^2");
  const double bonus = spec.w_A * spec.R_star;
  double loss = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double p = F.support()[i];
    if (p < spec.p_min && bonus >= misreport_loss(spec, 1.0, p) - kTie) loss += spec.cost * F.weights()[i];
  }
  return loss;
}

BestResponder numeric_responder(const PrincipalSpec& spec, double grid_step, bool favour_mechanism) {
  validate(spec);
  return [spec, grid_step, favour_mechanism](double p, const Gate& gate) {
    BestResponseInput in{p, spec.R_star, spec.w_C, spec.w_A, gate, spec.rule};
    auto best = numeric_best_report(in, grid_step);
    if (favour_mechanism) {
      if (const auto* s = std::get_if<StepGate>(&gate.kind())) {
        if (best.report < s->threshold && report_payoff(in, s->threshold) >= best.payoff - kTie)
          return s->threshold;
      }
    }
    return best.report;
  };
}

BestResponder affine_responder(const PrincipalSpec& spec) {
  validate(spec);
  if (spec.rule.kind() != RuleKind::brier)
    throw std::invalid_argument("closed-form affine response is specific to the Brier rule");
  return [spec](double p, const Gate& gate) {
    const auto* a = std::get_if<AffineGate>(&gate.kind());
    if (!a) throw std::invalid_argument("affine responder needs an affine gate");
    return std::clamp(p + spec.w_A * spec.R_star * a->slope / (2.0 * spec.w_C), 0.0, 1.0);
  };
}

double principal_utility(const PrincipalSpec& spec, const Gate& gate, const TypeDistribution& F,
                         const BestResponder& responder) {
  validate(spec);
  double u = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double p = F.support()[i];
    u += F.weights()[i] * approve_prob(gate, responder(p, gate)) * spec.benefit(p);
  }
  return u;
}

double first_best_utility(const PrincipalSpec& spec, const TypeDistribution& F) {
  double u = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i)
    if (F.support()[i] >= spec.p_min) u += F.weights()[i] * spec.R_star;
  return u;
}

AffineSearchResult best_affine_gate(const PrincipalSpec& spec, const TypeDistribution& F, int n, Execution exec) {
  validate(spec);
  if (n < 2) throw std::invalid_argument("affine search grid needs at least two points per axis");
  if (spec.rule.kind() != RuleKind::brier)
    throw std::invalid_argument("affine search uses the Brier closed-form response");
  const auto utilities = exec.is_serial() ? kernels::affine_utilities_serial(spec, F, n)
                                          : kernels::affine_utilities_omp(spec, F, n, exec.threads);
  std::size_t best = 0;
  for (std::size_t k = 1; k < utilities.size(); ++k)
    if (utilities[k] > utilities[best]) best = k;
  const auto [a, b] = kernels::affine_grid_point(n, best);
  return {utilities[best], a, b};
}

}  // namespace gatelab
