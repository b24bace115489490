#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gatelab/execution.hpp"
#include "gatelab/gating.hpp"
#include "gatelab/scoring.hpp"

namespace gatelab {

class TypeDistribution {
 public:
  TypeDistribution(std::vector<double> support, std::vector<double> weights);

  // n equally weighted nodes i/(n-1) on [0,1].
  static TypeDistribution uniform_nodes(std::size_t n = 1001);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }

 private:
  std::vector<double> support_;
  std::vector<double> weights_;
};

struct PrincipalSpec {
  double p_min;
  double R_star;
  double cost;
  double w_C;
  double w_A;
  ScoringRule rule = ScoringRule::brier();

  double ratio() const { return w_A * R_star / w_C; }
  // Benefit of approving type p: R* above the cutoff, -cost below it.
  double benefit(double p) const { return p >= p_min ? R_star : -cost; }
};

void validate(const PrincipalSpec& spec);

class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct OptimalThreshold {
  bool saturated = false;
  std::optional<double> r0;  // empty when saturated
};

OptimalThreshold optimal_threshold(const PrincipalSpec& spec);

struct ScreeningEntry {
  double type;
  double report;
  bool approved;
};

// Reports induced by a step gate at r0. Pooling types that are exactly
// indifferent are approved.
std::vector<ScreeningEntry> induced_screening(const PrincipalSpec& spec, double r0, std::span<const double> p_grid);

bool first_best_check(const PrincipalSpec& spec, double r0, std::span<const double> p_grid);

double saturated_welfare_loss(const PrincipalSpec& spec, const TypeDistribution& F);

// Maps a type to the report it sends against a given gate.
using BestResponder = std::function<double(double type, const Gate& gate)>;

// Grid oracle from best_response. With favour_mechanism, a step-gate type that
// is indifferent between truth and r_min reports r_min.
BestResponder numeric_responder(const PrincipalSpec& spec, double grid_step = 1e-4, bool favour_mechanism = true);

// Exact Brier best response to an affine gate: clamp(p + w_A R* b / (2 w_C)).
BestResponder affine_responder(const PrincipalSpec& spec);

double principal_utility(const PrincipalSpec& spec, const Gate& gate, const TypeDistribution& F,
                         const BestResponder& responder);

double first_best_utility(const PrincipalSpec& spec, const TypeDistribution& F);

struct AffineSearchResult {
  double utility;
  double intercept;
  double slope;
};

// Searches intercept a = i/(n-1) and slope b = (1-a) j/(n-1) with the exact
// affine best response.
AffineSearchResult best_affine_gate(const PrincipalSpec& spec, const TypeDistribution& F, int n = 50,
                                    Execution exec = Execution::serial());

}  // namespace gatelab
