#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gatelab/execution.hpp"

namespace gatelab {

enum class Alternative { two_sided, greater, less };

class DegenerateSampleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> df;
  std::optional<double> effect_size;
};

double normal_cdf(double z);
double normal_sf(double z);
double student_t_cdf(double t, double df);
double student_t_sf(double t, double df);

// "greater" tests mean(a) > mean(b).
TestResult welch_t(std::span<const double> a, std::span<const double> b, Alternative alt = Alternative::two_sided);
TestResult paired_t(std::span<const double> diffs, Alternative alt = Alternative::two_sided);
// "greater" tests x1/n1 > x2/n2, pooled-variance z.
TestResult two_prop_z(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2,
                      Alternative alt = Alternative::two_sided);

struct JonckheereOptions {
  bool tie_corrected_variance = false;
};

// Groups in hypothesised increasing order; "greater" tests an increasing trend.
TestResult jonckheere_terpstra(const std::vector<std::vector<double>>& groups, Alternative alt = Alternative::greater,
                               JonckheereOptions opts = {});

double spearman_rho(std::span<const double> x, std::span<const double> y);
// Pooled-SD standardised mean difference (mean(a) - mean(b)) / s_pooled.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct Interval {
  double lo, hi;
};

using SampleStatistic = std::function<double(std::span<const double>)>;

double mean_of(std::span<const double> x);

// Percentile interval from resamples drawn in fixed blocks with per-block streams.
Interval bootstrap_ci(std::span<const double> sample, const SampleStatistic& stat, std::size_t resamples = 10000,
                      double level = 0.95, std::uint64_t seed = 0, Execution exec = Execution::serial());

Interval clopper_pearson(std::size_t k, std::size_t n, double level = 0.95);

struct HolmResult {
  std::vector<double> adjusted;
  std::vector<bool> rejected;
};

HolmResult holm_correct(std::span<const double> p_values, double alpha = 0.05);

}  // namespace gatelab
