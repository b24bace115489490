#include "gatelab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "kernels/kernels.hpp"

namespace gatelab {

namespace {

double variance(std::span<const double> x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double p_from_normal(double z, Alternative alt) {
  switch (alt) {
    case Alternative::greater: return normal_sf(z);
    case Alternative::less: return normal_cdf(z);
    case Alternative::two_sided: return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
  }
  return 1.0;
}

double p_from_t(double t, double df, Alternative alt) {
  switch (alt) {
    case Alternative::greater: return student_t_sf(t, df);
    case Alternative::less: return student_t_cdf(t, df);
    case Alternative::two_sided: return std::min(1.0, 2.0 * student_t_sf(std::abs(t), df));
  }
  return 1.0;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal_distribution<double>(), z); }

double normal_sf(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z));
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

double student_t_sf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(df), t));
}

double mean_of(std::span<const double> x) {
  if (x.empty()) throw DegenerateSampleError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

TestResult welch_t(std::span<const double> a, std::span<const double> b, Alternative alt) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateSampleError("Welch t needs at least two values per sample");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = variance(a, ma) / static_cast<double>(a.size());
  const double vb = variance(b, mb) / static_cast<double>(b.size());
  if (va + vb <= 0.0) throw DegenerateSampleError("Welch t needs positive variance in at least one sample");
  const double t = (ma - mb) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  return {t, p_from_t(t, df, alt), df, std::nullopt};
}

TestResult paired_t(std::span<const double> diffs, Alternative alt) {
  if (diffs.size() < 2) throw DegenerateSampleError("paired t needs at least two differences");
  const double m = mean_of(diffs);
  const double v = variance(diffs, m);
  if (v <= 0.0) throw DegenerateSampleError("paired t needs non-zero variance of the differences");
  const double n = static_cast<double>(diffs.size());
  const double t = m / std::sqrt(v / n);
  return {t, p_from_t(t, n - 1.0, alt), n - 1.0, m / std::sqrt(v)};
}

TestResult two_prop_z(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2, Alternative alt) {
  if (n1 < 1 || n2 < 1) throw DegenerateSampleError("two-proportion z needs non-empty groups");
  if (x1 > n1 || x2 > n2) throw std::invalid_argument("successes exceed trials");
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pool = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  if (pool <= 0.0 || pool >= 1.0) throw DegenerateSampleError("pooled proportion is 0 or 1");
  const double se = std::sqrt(pool * (1.0 - pool) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  const double z = (p1 - p2) / se;
  return {z, p_from_normal(z, alt), std::nullopt, p1 - p2};
}

TestResult jonckheere_terpstra(const std::vector<std::vector<double>>& groups, Alternative alt,
                               JonckheereOptions opts) {
  if (groups.size() < 3) throw std::invalid_argument("Jonckheere-Terpstra needs at least three groups");
  std::vector<std::vector<double>> sorted;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("Jonckheere-Terpstra groups must be non-empty");
    sorted.push_back(g);
    std::sort(sorted.back().begin(), sorted.back().end());
  }

  double u = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j)
      for (double x : sorted[i]) {
        const auto lo = std::lower_bound(sorted[j].begin(), sorted[j].end(), x);
        const auto hi = std::upper_bound(lo, sorted[j].end(), x);
        u += static_cast<double>(sorted[j].end() - hi) + 0.5 * static_cast<double>(hi - lo);
      }

  double n = 0.0, sum_sq = 0.0, sum_var = 0.0;
  for (const auto& g : sorted) {
    const double ni = static_cast<double>(g.size());
    n += ni;
    sum_sq += ni * ni;
    sum_var += ni * ni * (2.0 * ni + 3.0);
  }
  const double mean = (n * n - sum_sq) / 4.0;
  double var = (n * n * (2.0 * n + 3.0) - sum_var) / 72.0;

  if (opts.tie_corrected_variance) {
    std::vector<double> all;
    for (const auto& g : sorted) all.insert(all.end(), g.begin(), g.end());
    std::sort(all.begin(), all.end());
    double t1 = 0, t2 = 0, t3 = 0;
    for (std::size_t i = 0; i < all.size();) {
      std::size_t j = i;
      while (j < all.size() && all[j] == all[i]) ++j;
      const double t = static_cast<double>(j - i);
      t1 += t * (t - 1) * (2 * t + 5);
      t2 += t * (t - 1) * (t - 2);
      t3 += t * (t - 1);
      i = j;
    }
    double g1 = 0, g2 = 0, g3 = 0;
    for (const auto& g : sorted) {
      const double ni = static_cast<double>(g.size());
      g1 += ni * (ni - 1) * (2 * ni + 5);
      g2 += ni * (ni - 1) * (ni - 2);
      g3 += ni * (ni - 1);
    }
    var = (n * (n - 1) * (2 * n + 5) - g1 - t1) / 72.0;
    if (n > 2) var += g2 * t2 / (36.0 * n * (n - 1) * (n - 2));
    var += g3 * t3 / (8.0 * n * (n - 1));
  }
  if (var <= 0.0) throw DegenerateSampleError("Jonckheere-Terpstra variance is zero");
  const double z = (u - mean) / std::sqrt(var);
  TestResult r{z, p_from_normal(z, alt), std::nullopt, std::nullopt};
  r.effect_size = u;
  return r;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("Spearman inputs differ in length");
  if (x.size() < 2) throw DegenerateSampleError("Spearman needs at least two pairs");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mx = mean_of(rx), my = mean_of(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0 || syy <= 0) throw DegenerateSampleError("Spearman correlation of a constant vector");
  return sxy / std::sqrt(sxx * syy);
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateSampleError("Cohen's d needs at least two values per sample");
  const double ma = mean_of(a), mb = mean_of(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled = ((na - 1) * variance(a, ma) + (nb - 1) * variance(b, mb)) / (na + nb - 2);
  if (pooled <= 0) throw DegenerateSampleError("Cohen's d with zero pooled standard deviation");
  return (ma - mb) / std::sqrt(pooled);
}

Interval bootstrap_ci(std::span<const double> sample, const SampleStatistic& stat, std::size_t resamples, double level,
                      std::uint64_t seed, Execution exec) {
  if (sample.empty()) throw DegenerateSampleError("bootstrap of an empty sample");
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  if (!(level > 0 && level < 1)) throw std::invalid_argument("confidence level must lie in (0,1)");
  auto stats = exec.is_serial() ? kernels::bootstrap_stats_serial(sample, stat, resamples, seed)
                                : kernels::bootstrap_stats_omp(sample, stat, resamples, seed, exec.threads);
  std::sort(stats.begin(), stats.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  return {quantile((1.0 - level) / 2.0), quantile((1.0 + level) / 2.0)};
}

Interval clopper_pearson(std::size_t k, std::size_t n, double level) {
  if (n < 1 || k > n) throw std::invalid_argument("Clopper-Pearson needs 0 <= k <= n and n >= 1");
  if (!(level > 0 && level < 1)) throw std::invalid_argument("confidence level must lie in (0,1)");
  const double alpha = 1.0 - level;
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  const double lo = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<double>(kd, nd - kd + 1), alpha / 2);
  const double hi =
      k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<double>(kd + 1, nd - kd), 1 - alpha / 2);
  return {lo, hi};
}

HolmResult holm_correct(std::span<const double> p, double alpha) {
  if (p.empty()) throw std::invalid_argument("Holm correction needs at least one p-value");
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  HolmResult out{std::vector<double>(m), std::vector<bool>(m, false)};
  double running = 0.0;
  bool still_rejecting = true;
  for (std::size_t i = 0; i < m; ++i) {
    const double pi = p[order[i]];
    const double factor = static_cast<double>(m - i);
    running = std::max(running, std::min(1.0, factor * pi));
    out.adjusted[order[i]] = running;
    if (still_rejecting && pi <= alpha / factor) {
      out.rejected[order[i]] = true;
    } else {
      still_rejecting = false;
    }
  }
  return out;
}

}  // namespace gatelab
