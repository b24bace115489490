#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gatelab/stats.hpp"

using namespace gatelab;
using doctest::Approx;

namespace {
using Vec = std::vector<double>;

double mean(const Vec& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}
double var(const Vec& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}
}  // namespace

TEST_CASE("distribution functions") {
  CHECK(normal_cdf(0.0) == Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-12));
  CHECK(normal_sf(3.0) == Approx(0.0013498980316301).epsilon(1e-10));
  CHECK(student_t_cdf(0.0, 5) == Approx(0.5));
  CHECK(student_t_cdf(2.015048373333024, 5) == Approx(0.95).epsilon(1e-10));
  CHECK(student_t_sf(-1.0, 3) == Approx(student_t_cdf(1.0, 3)));
}

TEST_CASE("Welch t") {
  const Vec a{1, 2, 3}, b{2, 3, 4};
  const auto r = welch_t(a, b);
  CHECK(r.statistic == Approx(-1.2247).epsilon(1e-4));
  CHECK(*r.df == Approx(4.0));
  CHECK(r.p_value == Approx(2 * student_t_cdf(-1.224744871391589, 4.0)));
  const auto same = welch_t(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == Approx(1.0));

  // independent oracle for unequal variances
  const Vec c{0.1, 0.5, 0.9, 1.7}, d{2.0, 2.2, 2.1};
  const double se2 = var(c) / 4 + var(d) / 3;
  const double t = (mean(c) - mean(d)) / std::sqrt(se2);
  const double df = se2 * se2 / (std::pow(var(c) / 4, 2) / 3 + std::pow(var(d) / 3, 2) / 2);
  const auto w = welch_t(c, d, Alternative::less);
  CHECK(w.statistic == Approx(t));
  CHECK(*w.df == Approx(df));
  CHECK(w.p_value == Approx(student_t_cdf(t, df)));

  std::mt19937_64 eng(1);
  std::normal_distribution<double> z;
  Vec x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(10 + z(eng));
    y.push_back(z(eng));
  }
  CHECK(welch_t(x, y, Alternative::greater).p_value < 1e-6);
  CHECK_THROWS_AS(welch_t(Vec{1.0}, Vec{1, 2}), DegenerateSampleError);
}

TEST_CASE("paired t") {
  const Vec d{1, 1, 1, 1, 0.9};
  const double t = mean(d) / (std::sqrt(var(d)) / std::sqrt(5.0));
  const auto r = paired_t(d, Alternative::greater);
  CHECK(r.statistic == Approx(t));
  CHECK(*r.df == 4.0);
  Vec neg;
  for (double v : d) neg.push_back(-v);
  CHECK(paired_t(neg).statistic == Approx(-t));
  CHECK_THROWS_AS(paired_t(Vec{0, 0, 0}), DegenerateSampleError);
}

TEST_CASE("two-proportion z") {
  const auto r = two_prop_z(30, 100, 10, 100, Alternative::greater);
  CHECK(r.statistic == Approx(0.2 / std::sqrt(0.2 * 0.8 * 0.02)));
  CHECK(r.statistic == Approx(3.5355).epsilon(1e-4));
  CHECK(two_prop_z(20, 100, 20, 100).statistic == 0.0);
  CHECK(two_prop_z(10, 100, 30, 100).statistic == Approx(-r.statistic));
  CHECK_THROWS(two_prop_z(0, 10, 0, 10));
}

TEST_CASE("Jonckheere-Terpstra") {
  const auto r = jonckheere_terpstra({{1, 2}, {3, 4}, {5, 6}});
  CHECK(*r.effect_size == 12.0);
  // mean = (N^2 - sum n^2)/4 = 6, var = (N^2(2N+3) - sum n^2(2n+3))/72
  const double v = (36.0 * 15 - 3 * 4 * 7) / 72.0;
  CHECK(v == Approx(6.3333).epsilon(1e-4));
  CHECK(r.statistic == Approx(6 / std::sqrt(v)));
  CHECK(r.statistic == Approx(2.3842).epsilon(1e-4));
  CHECK(jonckheere_terpstra({{5, 6}, {3, 4}, {1, 2}}).statistic == Approx(-r.statistic));
  const auto flat = jonckheere_terpstra({{2, 2}, {2, 2}, {2, 2}});
  CHECK(flat.statistic == 0.0);
  CHECK(*flat.effect_size == 6.0);
  const auto corrected = jonckheere_terpstra({{1, 2, 2}, {2, 3, 3}, {3, 4, 4}}, Alternative::greater, {true});
  CHECK(corrected.statistic > 0);
}

TEST_CASE("Spearman") {
  const Vec x{1, 2, 3, 4, 5};
  CHECK(spearman_rho(x, Vec{2, 4, 6, 8, 10}) == Approx(1.0));
  CHECK(spearman_rho(x, Vec{5, 4, 3, 2, 1}) == Approx(-1.0));
  CHECK(spearman_rho(x, Vec{1, 3, 2, 5, 4}) == Approx(0.8));
  CHECK(spearman_rho(Vec{1, 2, 2, 3}, Vec{1, 2, 3, 4}) == Approx(0.9486832980505138));
  CHECK_THROWS_AS(spearman_rho(x, Vec{1, 1, 1, 1, 1}), DegenerateSampleError);
}

TEST_CASE("Cohen's d") {
  CHECK(cohens_d(Vec{1, 2, 3}, Vec{3, 2, 1}) == 0.0);
  CHECK(cohens_d(Vec{2, 3, 4}, Vec{1, 2, 3}) == Approx(1.0));
  CHECK_THROWS_AS(cohens_d(Vec{0, 0}, Vec{1, 1}), DegenerateSampleError);
}

TEST_CASE("order within a group does not matter") {
  Vec a{0.3, 1.2, -0.4, 2.2, 0.9}, b{1.1, 0.2, 0.8, 1.9};
  const auto w1 = welch_t(a, b);
  Vec c{2.5, 0.1, 1.7};
  const auto j1 = jonckheere_terpstra({a, b, c});
  std::reverse(a.begin(), a.end());
  std::rotate(b.begin(), b.begin() + 1, b.end());
  CHECK(welch_t(a, b).statistic == Approx(w1.statistic).epsilon(1e-12));
  std::swap(c[0], c[2]);
  CHECK(jonckheere_terpstra({a, b, c}).statistic == j1.statistic);
  CHECK(cohens_d(a, b) == Approx(cohens_d(Vec{0.3, 1.2, -0.4, 2.2, 0.9}, Vec{1.1, 0.2, 0.8, 1.9})));
}

TEST_CASE("bootstrap") {
  const Vec c(40, 3.5);
  const auto ci = bootstrap_ci(c, mean_of, 2000, 0.95, 1);
  CHECK(ci.lo == 3.5);
  CHECK(ci.hi == 3.5);

  std::mt19937_64 eng(4);
  std::normal_distribution<double> z;
  Vec big;
  for (int i = 0; i < 10000; ++i) big.push_back(z(eng));
  const auto w = bootstrap_ci(big, mean_of, 2000, 0.95, 9);
  CHECK(w.lo < mean(big));
  CHECK(w.hi > mean(big));
  CHECK((w.hi - w.lo) == Approx(2 * 1.96 / 100).epsilon(0.1));
  const auto again = bootstrap_ci(big, mean_of, 2000, 0.95, 9);
  CHECK(again.lo == w.lo);
  CHECK(again.hi == w.hi);
}

TEST_CASE("bootstrap coverage on small normal samples") {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> z(2.0, 1.0);
  int covered = 0;
  const int reps = 300;
  for (int rep = 0; rep < reps; ++rep) {
    Vec s;
    for (int i = 0; i < 50; ++i) s.push_back(z(eng));
    const auto ci = bootstrap_ci(s, mean_of, 2000, 0.95, rep);
    covered += ci.lo <= 2.0 && 2.0 <= ci.hi;
  }
  CHECK(covered >= 0.91 * reps);
}

TEST_CASE("Clopper-Pearson") {
  const auto zero = clopper_pearson(0, 20);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == Approx(1 - std::pow(0.025, 1.0 / 20)).epsilon(1e-10));
  CHECK(zero.hi == Approx(0.1684).epsilon(1e-3));
  CHECK(clopper_pearson(20, 20).hi == 1.0);
  CHECK(clopper_pearson(20, 20).lo == Approx(std::pow(0.025, 1.0 / 20)).epsilon(1e-10));
  const auto mid = clopper_pearson(5, 10);
  CHECK(mid.lo == Approx(0.187086).epsilon(1e-5));
  CHECK(mid.hi == Approx(0.812914).epsilon(1e-5));
}

TEST_CASE("Clopper-Pearson coverage") {
  std::mt19937_64 eng(21);
  for (double p : {0.1, 0.5, 0.9}) {
    std::binomial_distribution<int> bin(50, p);
    int covered = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto ci = clopper_pearson(bin(eng), 50);
      covered += ci.lo <= p && p <= ci.hi;
    }
    CHECK(covered >= 0.94 * 10000);
  }
}

TEST_CASE("Holm") {
  const Vec p{0.001, 0.011, 0.02, 0.03, 0.049};
  const auto h = holm_correct(p);
  CHECK(h.rejected == std::vector<bool>{true, true, false, false, false});
  CHECK(h.adjusted[0] == Approx(0.005));
  CHECK(h.adjusted[1] == Approx(0.044));
  CHECK(h.adjusted[2] == Approx(0.06));
  const auto none = holm_correct(Vec{1, 1, 1});
  CHECK(std::none_of(none.rejected.begin(), none.rejected.end(), [](bool b) { return b; }));
  CHECK(holm_correct(Vec{0.04}).rejected[0]);
  // raising alpha never removes a rejection
  for (double lo : {0.01, 0.02, 0.05})
    for (double hi : {0.05, 0.1, 0.2}) {
      if (hi < lo) continue;
      const auto a = holm_correct(p, lo), b = holm_correct(p, hi);
      for (std::size_t i = 0; i < p.size(); ++i) CHECK((!a.rejected[i] || b.rejected[i]));
    }
}

TEST_CASE("Jonckheere-Terpstra power and size") {
  std::mt19937_64 eng(99);
  std::normal_distribution<double> z;
  int detected = 0, quiet = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Vec> shifted(3), null(3);
    for (int g = 0; g < 3; ++g)
      for (int i = 0; i < 30; ++i) {
        shifted[g].push_back(g + z(eng));
        null[g].push_back(z(eng));
      }
    detected += jonckheere_terpstra(shifted).statistic > 2;
    quiet += std::abs(jonckheere_terpstra(null).statistic) < 2;
  }
  CHECK(detected >= 0.9 * 200);
  CHECK(quiet >= 0.9 * 200);
}
