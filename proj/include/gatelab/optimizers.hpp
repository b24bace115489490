#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "gatelab/execution.hpp"

namespace gatelab {

// Reports are drawn from N(mean, sd^2) and then clipped to [0,1].
struct GaussianReportPolicy {
  double mean;
  double sd;
};

using PayoffFn = std::function<double(double)>;

struct GradientEstimate {
  double estimate;
  double standard_error;
};

// Score-function estimate of d/dmean E[V(clip(r))]: mean of V(clip(r)) (r - mean) / sd^2.
// Samples are drawn in fixed blocks with per-block streams, so serial and
// parallel execution agree bit for bit.
GradientEstimate mc_gradient_at(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n_samples,
                                std::uint64_t seed, Execution exec = Execution::serial());

// Exact gradient at mean = p for Brier plus a step gate, ignoring clipping.
double analytic_gradient_step_gate(double p, double sigma, double r_min, double w_C, double w_A, double R);

// True when mean +/- 4 sd stays inside [0,1].
bool clipping_negligible(const GaussianReportPolicy& policy);

// J(mean) = E[V(clip(mean + sd Z))] by adaptive Gauss-Kronrod quadrature.
double smoothed_objective(const GaussianReportPolicy& policy, const PayoffFn& payoff);
double fd_gradient(const GaussianReportPolicy& policy, const PayoffFn& payoff, double h = 1e-3);

struct UniformDist {
  double lo = 0.0, hi = 1.0;
};
struct GaussianDist {
  double mean = 0.0, sd = 1.0;
};
struct BetaDist {
  double alpha = 1.0, beta = 1.0;  // both >= 1 keeps the density log-concave
};
using LogConcaveDist = std::variant<UniformDist, GaussianDist, BetaDist>;

struct CovarianceCheck {
  double cov_estimate;
  double standard_error;
  bool positive;  // estimate exceeds 3 standard errors
};

CovarianceCheck covariance_positivity_check(const LogConcaveDist& dist, const std::function<double(double)>& f,
                                            std::size_t n_samples, std::uint64_t seed);

struct GradientAscent {
  double sigma = 0.1;
  double step = 0.2;
  int iterations = 500;
  std::size_t pairs_per_iteration = 2000;  // antithetic pairs
};

// (parents, offspring) comma strategy with truncation selection and
// self-adaptive log-normal mutation; the mutation scale never drops below
// min_mutation.
struct Evolutionary {
  std::size_t parents = 20;
  std::size_t offspring = 80;
  int generations = 200;
  double mutation_sd = 0.1;
  double min_mutation = 1e-3;
  double learning_rate = 0.3;
};

using AscentMethod = std::variant<GradientAscent, Evolutionary>;

// Returns the mean (or population mean) after every iteration, starting point
// included. Iterates are clipped to [0,1].
std::vector<double> ascend(const PayoffFn& payoff, const AscentMethod& method, double start, std::uint64_t seed);

}  // namespace gatelab
