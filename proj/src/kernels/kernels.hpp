#pragma once

// Serial reference kernels and their OpenMP counterparts. Each pair must
// return identical results; the parallel versions only change scheduling.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gatelab/bon.hpp"
#include "gatelab/optimizers.hpp"
#include "gatelab/principal.hpp"

namespace gatelab::kernels {

inline constexpr std::size_t kMcBlock = 1u << 16;
inline constexpr std::size_t kBootstrapBlock = 64;

struct ScoreMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

ScoreMoments score_moments_serial(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n,
                                  std::uint64_t seed);
ScoreMoments score_moments_omp(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n,
                               std::uint64_t seed, int threads);

std::pair<double, double> affine_grid_point(int n, std::size_t k);
std::vector<double> affine_utilities_serial(const PrincipalSpec& spec, const TypeDistribution& F, int n);
std::vector<double> affine_utilities_omp(const PrincipalSpec& spec, const TypeDistribution& F, int n, int threads);

using Statistic = std::function<double(std::span<const double>)>;
std::vector<double> bootstrap_stats_serial(std::span<const double> sample, const Statistic& stat,
                                           std::size_t resamples, std::uint64_t seed);
std::vector<double> bootstrap_stats_omp(std::span<const double> sample, const Statistic& stat, std::size_t resamples,
                                        std::uint64_t seed, int threads);

struct SweepPlan {
  const SweepSpec& spec;
  int n_max;
};

// bank[seed_index * tasks + task_index] holds n_max completions.
using CompletionBank = std::vector<std::vector<Completion>>;

CompletionBank fill_bank_serial(const SweepPlan& plan, const CompletionSource& source);
CompletionBank fill_bank_omp(const SweepPlan& plan, const CompletionSource& source, int threads);

SweepRecord sweep_cell(const SweepPlan& plan, const CompletionBank& bank, std::size_t config, std::size_t seed_index,
                       std::size_t task_index);
std::vector<SweepRecord> sweep_cells_serial(const SweepPlan& plan, const CompletionBank& bank);
std::vector<SweepRecord> sweep_cells_omp(const SweepPlan& plan, const CompletionBank& bank, int threads);

}  // namespace gatelab::kernels
