#include <omp.h>

#include <algorithm>

#include "kernels/kernels.hpp"

namespace gatelab::kernels {

namespace {

int team_size(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

double affine_utility(const PrincipalSpec& spec, const TypeDistribution& F, double a, double b) {
  const double shift = spec.ratio() * b / 2.0;
  const auto& p = F.support();
  const auto& w = F.weights();
  double u = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = std::clamp(p[i] + shift, 0.0, 1.0);
    u += w[i] * std::clamp(a + b * r, 0.0, 1.0) * spec.benefit(p[i]);
  }
  return u;
}

}  // namespace

std::pair<double, double> affine_grid_point(int n, std::size_t k) {
  const auto i = static_cast<int>(k / static_cast<std::size_t>(n));
  const auto j = static_cast<int>(k % static_cast<std::size_t>(n));
  const double a = static_cast<double>(i) / (n - 1);
  return {a, (1.0 - a) * static_cast<double>(j) / (n - 1)};
}

std::vector<double> affine_utilities_serial(const PrincipalSpec& spec, const TypeDistribution& F, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto [a, b] = affine_grid_point(n, k);
    out[k] = affine_utility(spec, F, a, b);
  }
  return out;
}

std::vector<double> affine_utilities_omp(const PrincipalSpec& spec, const TypeDistribution& F, int n, int threads) {
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  const auto total = static_cast<long>(out.size());
#pragma omp parallel for schedule(static) num_threads(team_size(threads))
  for (long k = 0; k < total; ++k) {
    const auto [a, b] = affine_grid_point(n, static_cast<std::size_t>(k));
    out[k] = affine_utility(spec, F, a, b);
  }
  return out;
}

}  // namespace gatelab::kernels
