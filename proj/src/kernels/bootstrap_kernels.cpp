#include <omp.h>

#include <boost/random/uniform_int_distribution.hpp>

#include "gatelab/rng.hpp"
#include "kernels/kernels.hpp"

namespace gatelab::kernels {

namespace {

int team_size(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

void run_block(std::span<const double> sample, const Statistic& stat, std::size_t resamples, std::uint64_t seed,
               std::size_t b, std::vector<double>& out) {
  Engine eng = make_engine({stream::bootstrap, seed, b});
  boost::random::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> buf(sample.size());
  const std::size_t end = std::min(resamples, (b + 1) * kBootstrapBlock);
  for (std::size_t r = b * kBootstrapBlock; r < end; ++r) {
    for (auto& v : buf) v = sample[pick(eng)];
    out[r] = stat(buf);
  }
}

}  // namespace

std::vector<double> bootstrap_stats_serial(std::span<const double> sample, const Statistic& stat,
                                           std::size_t resamples, std::uint64_t seed) {
  std::vector<double> out(resamples);
  const std::size_t blocks = (resamples + kBootstrapBlock - 1) / kBootstrapBlock;
  for (std::size_t b = 0; b < blocks; ++b) run_block(sample, stat, resamples, seed, b, out);
  return out;
}

std::vector<double> bootstrap_stats_omp(std::span<const double> sample, const Statistic& stat, std::size_t resamples,
                                        std::uint64_t seed, int threads) {
  std::vector<double> out(resamples);
  const auto blocks = static_cast<long>((resamples + kBootstrapBlock - 1) / kBootstrapBlock);
#pragma omp parallel for schedule(dynamic) num_threads(team_size(threads))
  for (long b = 0; b < blocks; ++b) run_block(sample, stat, resamples, seed, static_cast<std::size_t>(b), out);
  return out;
}

}  // namespace gatelab::kernels
