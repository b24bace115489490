#pragma once

#include <cstdint>
#include <span>

#include "gatelab/gating.hpp"
#include "gatelab/scoring.hpp"

namespace gatelab {

struct BestResponseInput {
  double p_star;
  double R_star;
  double w_C;
  double w_A;
  Gate gate;
  ScoringRule rule;
};

// Agent payoff for a single report: w_C * E[S(r, p*)] + w_A * q(r) * R*.
double report_payoff(const BestResponseInput& in, double r);

// First-order optimal report for a gate that is smooth at p*.
double closed_form_report(const BestResponseInput& in);

// Sharp-threshold inflation test for a binding type (p* < r_min).
// Indifference resolves to truthful.
bool inflation_condition(double p_star, double r_min, double w_C, double w_A, double R_star);

struct NumericBestReport {
  double report;
  double payoff;
  bool inflated;
};

// Grid argmax of report_payoff with spacing 1/ceil(1/grid_step); ties go to
// the lowest report. Step gates are searched over {p*} plus the approved
// branch starting at r_min itself.
NumericBestReport numeric_best_report(const BestResponseInput& in, double grid_step = 1e-4);

// Hoeffding sample size separating a report from a success rate Delta lower.
std::int64_t detection_sample_size(double delta, double alpha_sig);

// Two-point detector: flags inflation when the reported confidence exceeds the
// observed success rate by at least delta / 2.
bool inflation_detected(double reported, std::span<const int> outcomes, double delta);

}  // namespace gatelab
