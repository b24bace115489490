#include <omp.h>

#include <algorithm>
#include <boost/random/normal_distribution.hpp>

#include "gatelab/rng.hpp"
#include "kernels/kernels.hpp"

namespace gatelab::kernels {

namespace {

int team_size(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

std::size_t block_count(std::size_t n) { return (n + kMcBlock - 1) / kMcBlock; }

ScoreMoments block_moments(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n,
                           std::uint64_t seed, std::size_t b) {
  Engine eng = make_engine({stream::mc_gradient, seed, b});
  boost::random::normal_distribution<double> normal;
  const std::size_t end = std::min(n, (b + 1) * kMcBlock);
  const double inv_var = 1.0 / (policy.sd * policy.sd);
  ScoreMoments m;
  for (std::size_t i = b * kMcBlock; i < end; ++i) {
    const double r = policy.mean + policy.sd * normal(eng);
    const double g = payoff(std::clamp(r, 0.0, 1.0)) * (r - policy.mean) * inv_var;
    m.sum += g;
    m.sum_sq += g * g;
  }
  return m;
}

ScoreMoments combine(const std::vector<ScoreMoments>& blocks) {
  ScoreMoments total;
  for (const auto& m : blocks) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
  }
  return total;
}

}  // namespace

ScoreMoments score_moments_serial(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n,
                                  std::uint64_t seed) {
  std::vector<ScoreMoments> blocks(block_count(n));
  for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b] = block_moments(policy, payoff, n, seed, b);
  return combine(blocks);
}

ScoreMoments score_moments_omp(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n,
                               std::uint64_t seed, int threads) {
  std::vector<ScoreMoments> blocks(block_count(n));
  const auto nb = static_cast<long>(blocks.size());
#pragma omp parallel for schedule(dynamic) num_threads(team_size(threads))
  for (long b = 0; b < nb; ++b) blocks[b] = block_moments(policy, payoff, n, seed, static_cast<std::size_t>(b));
  return combine(blocks);
}

}  // namespace gatelab::kernels
