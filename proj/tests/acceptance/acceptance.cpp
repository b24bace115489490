// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed below; exit status is non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gatelab/best_response.hpp"
#include "gatelab/cgdp.hpp"
#include "gatelab/harness.hpp"
#include "gatelab/optimizers.hpp"
#include "gatelab/principal.hpp"
#include "gatelab/scoring.hpp"
#include "gatelab/stats.hpp"

using namespace gatelab;

namespace {

constexpr double kClosedFormTol = 1e-3;
constexpr double kLsatTol = 1e-3;
constexpr double kGradientTarget = 0.53990;
constexpr double kSeMultiple = 3.0;
constexpr double kIdentityTol = 1e-12;
constexpr double kPlateauTol = 0.02;
constexpr double kH4MinZ = 3.0;
constexpr double kRandomControlTol = 0.02;
constexpr double kPowerFloor = 0.8;
constexpr double kOracleTol = 1e-3;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> body;
};

std::vector<double> grid(double step) {
  std::vector<double> g;
  const long n = std::lround(1.0 / step);
  for (long i = 0; i <= n; ++i) g.push_back(static_cast<double>(i) / n);
  return g;
}

void closed_form(Outcome& o) {
  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double p = 0.02 + 0.96 * u(eng);
    const double w_C = 0.5 + u(eng);
    const double w_A = 0.01 * w_C * u(eng);
    const Gate g = i % 2 ? Gate::sigmoid(u(eng), 0.05 + 0.25 * u(eng)) : Gate::affine(0.3 * u(eng), 0.7 * u(eng));
    const BestResponseInput in{p, 0.2 + 0.8 * u(eng), w_C, w_A, g, ScoringRule::brier()};
    worst = std::max(worst, std::abs(numeric_best_report(in).report - closed_form_report(in)));
  }
  o.detail << "max |numeric - closed form| = " << worst << " over 200 inputs";
  o.require(worst <= kClosedFormTol, "tolerance 1e-3");
}

void sharp_threshold(Outcome& o) {
  const double r_min = 0.7;
  int checked = 0, skipped = 0, mismatches = 0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const double p = r_min * (i + 0.5) / 100.0;
      const double w_A = 0.5 * j / 99.0;
      if (std::abs(w_A - (r_min - p) * (r_min - p)) <= 1e-6) {
        ++skipped;
        continue;
      }
      const BestResponseInput in{p, 1.0, 1.0, w_A, Gate::step(r_min), ScoringRule::brier()};
      ++checked;
      if (numeric_best_report(in).inflated != inflation_condition(p, r_min, 1.0, w_A, 1.0)) ++mismatches;
    }
  o.detail << checked << " grid points, " << mismatches << " mismatches, " << skipped << " within 1e-6 of the boundary";
  o.require(mismatches == 0, "exact agreement");
}

void screening(Outcome& o) {
  std::mt19937_64 eng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto types = grid(0.001);
  const auto F = TypeDistribution::uniform_nodes(1001);
  int fb = 0, strict = 0;
  double min_gap = 1e9;
  for (int i = 0; i < 100; ++i) {
    const double p_min = 0.1 + 0.8 * u(eng);
    const double ratio = (1 - p_min) * (1 - p_min) * (0.05 + 0.9 * u(eng));
    const PrincipalSpec spec{p_min, 1.0, 0.2 + 1.8 * u(eng), 1.0, ratio, ScoringRule::brier()};
    const double r0 = *optimal_threshold(spec).r0;
    fb += first_best_check(spec, r0, types);
    const double step_u = principal_utility(spec, Gate::step(r0), F, numeric_responder(spec, 1e-3));
    const double affine_u = best_affine_gate(spec, F, 50).utility;
    min_gap = std::min(min_gap, step_u - affine_u);
    strict += step_u > affine_u;
  }
  o.detail << "first-best on " << fb << "/100 specs; step beats best affine on " << strict
           << "/100 (min gap " << min_gap << ")";
  o.require(fb == 100, "first-best screening");
  o.require(strict == 100, "affine strictly below step");
}

void saturated(Outcome& o) {
  const auto F = TypeDistribution::uniform_nodes(1001);
  const PrincipalSpec spec{0.5, 1.0, 1.0, 1.0, 0.36, ScoringRule::brier()};
  const double L = saturated_welfare_loss(spec, F);
  o.detail << "L_sat = " << L << " (target 0.1 c)";
  o.require(std::abs(L - 0.1) <= kLsatTol, "within 1e-3");
}

PayoffFn composite(double p, const Gate& g, double w_C, double w_A) {
  return [=](double r) { return w_C * expected_score(ScoringRule::brier(), r, p) + w_A * approve_prob(g, r); };
}

void gradients(Outcome& o) {
  const GaussianReportPolicy pol{0.5, 0.1};
  const auto V = composite(0.5, Gate::step(0.7), 1.0, 1.0);
  double sum = 0.0, var_sum = 0.0;
  int per_seed_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = mc_gradient_at(pol, V, 1'000'000, seed);
    sum += g.estimate;
    var_sum += g.standard_error * g.standard_error;
    per_seed_ok += std::abs(g.estimate - kGradientTarget) <= kSeMultiple * g.standard_error;
  }
  const double pooled = sum / 20, pooled_se = std::sqrt(var_sum) / 20;
  o.detail << "pooled MC " << pooled << " +- " << pooled_se << " (" << per_seed_ok << "/20 seeds within 3 SE)";
  o.require(std::abs(pooled - kGradientTarget) <= kSeMultiple * pooled_se, "pooled MC within 3 SE of 0.53990");

  int fd_ok = 0, fd_total = 0, sign_ok = 0, sign_total = 0;
  for (double p : {0.3, 0.5, 0.6})
    for (const auto& gate : {Gate::sigmoid(0.75, 0.1), Gate::sigmoid(0.8, 0.05), Gate::affine(0.05, 0.9)}) {
      const GaussianReportPolicy at{p, 0.1};
      const auto W = composite(p, gate, 1.0, 0.5);
      const auto mc = mc_gradient_at(at, W, 1'000'000, 77);
      ++fd_total;
      fd_ok += std::abs(mc.estimate - fd_gradient(at, W)) <= kSeMultiple * mc.standard_error;
      ++sign_total;
      sign_ok += mc.estimate > 0;
    }
  o.detail << "; FD agreement " << fd_ok << "/" << fd_total << "; positive sign " << sign_ok << "/" << sign_total;
  o.require(fd_ok == fd_total, "finite-difference agreement");
  o.require(sign_ok == sign_total, "positive gradient at the calibrated point");
}

void properness(Outcome& o) {
  std::mt19937_64 eng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> types;
  for (int i = 1; i < 100; ++i) types.push_back(i / 100.0);
  const auto brier = ScoringRule::brier();
  int destroyed = 0;
  for (int i = 0; i < 50; ++i) {
    const double w = 0.01 + 0.49 * u(eng);
    Gate g = Gate::step(0.05 + 0.9 * u(eng));
    if (i % 3 == 1) g = Gate::sigmoid(u(eng), 0.02 + 0.2 * u(eng));
    if (i % 3 == 2) {
      const double a = 0.5 * u(eng);
      g = Gate::affine(a, (1 - a) * (0.02 + 0.98 * u(eng)));
    }
    destroyed += !properness_check(brier, [&](double r) { return w * approve_prob(g, r); }, types).strictly_proper;
  }
  int kept = 0;
  for (int i = 0; i < 10; ++i) {
    const double c = -1 + 2 * u(eng);
    kept += properness_check(brier, [c](double) { return c; }, types).strictly_proper;
  }
  o.detail << destroyed << "/50 non-constant perturbations break properness; " << kept << "/10 constants keep it";
  o.require(destroyed == 50 && kept == 10, "properness classification");
}

void decomposition(Outcome& o) {
  std::mt19937_64 eng(707);
  std::uniform_int_distribution<int> size(1, 500), levels(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = size(eng), L = levels(eng);
    std::vector<double> r;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      const double v = std::floor(u(eng) * (L + 1)) / L;
      r.push_back(std::min(v, 1.0));
      y.push_back(u(eng) < r.back() ? 1 : 0);
    }
    const auto d = brier_decomposition(BinnedForecastSet(r, y));
    worst = std::max(worst, std::abs(d.brier - (d.reliability - d.resolution + d.uncertainty)));
  }
  o.detail << "max identity residual " << worst << " over 1000 datasets";
  o.require(worst <= kIdentityTol, "identity within 1e-12");
}

const HypothesisResult& find(const BatteryResult& r, HypothesisId id) {
  for (const auto& h : r.hypotheses)
    if (h.id == id) return h;
  throw std::logic_error("hypothesis missing");
}

struct Battery {
  ExperimentConfig cfg;
  BatteryResult result;
  double serial_s = 0, parallel_s = 0;
};

const Battery& battery() {
  static const Battery b = [] {
    Battery out;
    auto t0 = std::chrono::steady_clock::now();
    const auto run = run_experiment(out.cfg, Execution::serial());
    out.result = run_hypotheses(run.records, run.random_records, analysis_options(out.cfg));
    out.serial_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    t0 = std::chrono::steady_clock::now();
    const auto par = run_experiment(out.cfg, Execution::parallel(4));
    run_hypotheses(par.records, par.random_records, analysis_options(out.cfg));
    out.parallel_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return b;
}

void hypotheses(Outcome& o) {
  const auto& b = battery();
  const auto& r = b.result;
  for (const auto& h : r.hypotheses) {
    o.detail << to_string(h.id) << (h.pass ? " pass" : " fail") << " (p_holm " << h.p_holm << ") ";
    o.require(h.pass, to_string(h.id) + " pass with p_holm < 0.05");
  }
  const auto& h1 = find(r, HypothesisId::H1);
  o.require(h1.details.value("delta_brier", 0.0) > 0, "H1 delta BS > 0");
  const auto& h2 = find(r, HypothesisId::H2);
  o.require(h2.statistic && *h2.statistic > 0, "H2 JT z > 0");
  o.detail << "plateau spread " << (r.plateau_spread ? *r.plateau_spread : -1) << "; ";
  o.require(r.plateau_spread && *r.plateau_spread < kPlateauTol, "plateau spread < 0.02");
  const auto& h4 = find(r, HypothesisId::H4);
  for (const auto& row : h4.details.value("per_r_min", nlohmann::ordered_json::array())) {
    o.detail << "H4 z@" << row["r_min"].get<double>() << "=" << row["z"].get<double>() << " ";
    o.require(row["z"].get<double>() > kH4MinZ, "H4 z > 3 at r_min " + std::to_string(row["r_min"].get<double>()));
  }
  const auto& h5 = find(r, HypothesisId::H5);
  o.detail << "H5 bind " << h5.details.value("mean_delta_bind", 0.0) << " vs nonbind "
           << h5.details.value("mean_delta_nonbind", 0.0) << "; ";
  o.require(h5.details.value("mean_delta_bind", 0.0) > h5.details.value("mean_delta_nonbind", 0.0),
            "H5 delta_bind > delta_nonbind");
  const auto& h6 = find(r, HypothesisId::H6);
  o.require(h6.details.value("delta_brier", 0.0) < 0, "H6 delta BS < 0");
  const double rc = r.random_control ? r.random_control->max_abs : 1.0;
  o.detail << "random control max |delta_bind| " << rc << "; serial " << b.serial_s << " s, parallel=4 "
           << b.parallel_s << " s";
  o.require(rc < kRandomControlTol, "random control |delta_bind| < 0.02");
  o.require(b.serial_s < 600, "single-threaded under 10 min");
  o.require(b.parallel_s < 180, "parallel=4 under 3 min");
}

void geometry(Outcome& o) {
  const auto& g = battery().result.geometry;
  bool has_ci = !g.rows.empty();
  for (const auto& row : g.rows) {
    o.detail << "N=" << row.N << ":" << row.violations << "/" << row.triples << " ";
    has_ci = has_ci && row.ci.lo <= row.rate && row.rate <= row.ci.hi;
  }
  o.detail << "Spearman " << (g.spearman ? *g.spearman : NAN);
  o.require(!g.rows.empty() && g.rows.front().N == 1 && g.rows.front().violations == 0, "rate 0 at N=1");
  o.require(g.spearman && *g.spearman > 0, "Spearman(N, rate) > 0");
  o.require(has_ci, "Clopper-Pearson interval per N");
}

void detection(Outcome& o) {
  std::mt19937_64 eng(1010);
  for (double delta : {0.05, 0.1, 0.2}) {
    const auto K = detection_sample_size(delta, 0.05);
    const double p = 0.5;
    std::bernoulli_distribution bern(p);
    int hits = 0;
    const int trials = 2000;
    std::vector<int> y(static_cast<std::size_t>(K));
    for (int t = 0; t < trials; ++t) {
      for (auto& v : y) v = bern(eng);
      hits += inflation_detected(p + delta, y, delta);
    }
    const double power = static_cast<double>(hits) / trials;
    o.detail << "power@" << delta << " (K=" << K << ") = " << power << "; ";
    o.require(power >= kPowerFloor, "power >= 0.8 at delta " + std::to_string(delta));
  }
  const double ratio = static_cast<double>(detection_sample_size(0.05, 0.05)) / detection_sample_size(0.1, 0.05);
  o.detail << "K ratio " << ratio;
  o.require(ratio >= 3.4 && ratio <= 4.6, "K(0.05)/K(0.1) in [3.4, 4.6]");
}

bool close(double a, double b) { return std::abs(a - b) <= kOracleTol; }

void statistics(Outcome& o) {
  using V = std::vector<double>;
  int ok = 0, total = 0;
  auto check = [&](bool c, const std::string& what) {
    ++total;
    ok += c;
    o.require(c, what);
  };
  const auto w = welch_t(V{1, 2, 3}, V{2, 3, 4});
  check(close(w.statistic, -1.2247) && close(*w.df, 4.0), "welch worked example");
  check(close(two_prop_z(30, 100, 10, 100).statistic, 3.5355), "two-proportion worked example");
  const auto jt = jonckheere_terpstra({{1, 2}, {3, 4}, {5, 6}});
  check(close(*jt.effect_size, 12) && close(jt.statistic, 2.3842), "JT worked example");
  check(close(spearman_rho(V{1, 2, 3, 4, 5}, V{1, 3, 2, 5, 4}), 0.8), "spearman worked example");
  check(close(clopper_pearson(0, 20).hi, 0.1684) && clopper_pearson(0, 20).lo == 0.0, "clopper-pearson worked example");
  const auto holm = holm_correct(V{0.001, 0.011, 0.02, 0.03, 0.049});
  check(holm.rejected == std::vector<bool>{true, true, false, false, false}, "holm worked example");

  std::mt19937_64 eng(1111);
  // Clopper-Pearson coverage
  double worst_cov = 1.0;
  for (double p : {0.1, 0.5, 0.9}) {
    std::binomial_distribution<int> bin(50, p);
    int covered = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto ci = clopper_pearson(bin(eng), 50);
      covered += ci.lo <= p && p <= ci.hi;
    }
    worst_cov = std::min(worst_cov, covered / 10000.0);
  }
  check(worst_cov >= 0.94, "clopper-pearson coverage >= 0.94");
  // bootstrap coverage
  std::normal_distribution<double> z;
  int covered = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    V s(50);
    for (auto& v : s) v = z(eng);
    const auto ci = bootstrap_ci(s, mean_of, 10000, 0.95, static_cast<std::uint64_t>(rep));
    covered += ci.lo <= 0.0 && 0.0 <= ci.hi;
  }
  check(covered >= 930, "bootstrap coverage >= 0.93");
  // JT power and size
  int power = 0, size = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<V> up(3), flat(3);
    for (int g = 0; g < 3; ++g)
      for (int i = 0; i < 30; ++i) {
        up[g].push_back(g + z(eng));
        flat[g].push_back(z(eng));
      }
    power += jonckheere_terpstra(up).statistic > 2;
    size += std::abs(jonckheere_terpstra(flat).statistic) < 2;
  }
  check(power >= 450 && size >= 450, "JT power and size >= 0.9");
  o.detail << ok << "/" << total << " checks; CP coverage " << worst_cov << ", bootstrap " << covered / 1000.0
           << ", JT power " << power / 500.0 << ", JT size " << size / 500.0;
}

void trilemma(Outcome& o) {
  const auto toy = toy_instance();
  const auto search = exhaustive_trilemma_search(toy, 100, 1e-6);
  const auto ask = check_trilemma(toy, corner_policy(toy, AskPermission{}), 1e-9);
  const auto syc = check_trilemma(toy, corner_policy(toy, Sycophant{0.01}), 1e-9);
  const auto ref = check_trilemma(toy, corner_policy(toy, ConservativeRefusal{}), 1e-9);
  o.detail << "search over " << search.options_per_context << " options per context: "
           << (search.found_all_three ? "found" : "none") << " attaining all three";
  o.require(!search.found_all_three, "no (H*, C*, A=1) policy");
  o.require(ask.helpful && ask.calibrated && !ask.autonomous, "ask-permission attains H and C");
  o.require(syc.helpful && syc.autonomous && !syc.calibrated, "sycophant attains H and A");
  o.require(ref.calibrated && ref.autonomous && !ref.helpful, "conservative refusal attains C and A");
}

void sensitivity() {
  // Informational: how the battery responds to the agent coupling and payoff mode.
  struct Variant {
    std::string name;
    std::function<void(ExperimentConfig&)> tweak;
  };
  const std::vector<Variant> variants{
      {"coupling 0.3", [](ExperimentConfig& c) { c.agent.coupling = 0.3; }},
      {"coupling 0.6", [](ExperimentConfig& c) { c.agent.coupling = 0.6; }},
      {"mode expected", [](ExperimentConfig& c) { c.mode = PayoffMode::expected; }},
      {"mode proxy", [](ExperimentConfig& c) { c.mode = PayoffMode::proxy; }},
  };
  for (const auto& v : variants) {
    ExperimentConfig cfg;
    v.tweak(cfg);
    const auto run = run_experiment(cfg);
    const auto r = run_hypotheses(run.records, run.random_records, analysis_options(cfg));
    std::printf("INFO  sensitivity %-14s", v.name.c_str());
    for (const auto& h : r.hypotheses)
      std::printf(" %s=%s(%.3g)", to_string(h.id).c_str(), h.pass ? "pass" : "fail", h.statistic ? *h.statistic : NAN);
    std::printf("\n");
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form agreement", 5, closed_form},
      {2, "sharp-threshold condition", 5, sharp_threshold},
      {3, "first-best screening", 30, screening},
      {4, "saturated regime", 1, saturated},
      {5, "gradient checks", 60, gradients},
      {6, "properness destruction", 5, properness},
      {7, "Brier decomposition identity", 5, decomposition},
      {8, "hypothesis battery", 600, hypotheses},
      {9, "surface geometry", 600, geometry},
      {10, "detection scaling", 30, detection},
      {11, "statistics oracles", 120, statistics},
      {12, "trilemma brute force", 10, trilemma},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.require(false, "runtime budget " + std::to_string(c.budget_s) + " s");
    failures += !o.pass;
    std::printf("%s  criterion %2d  %-30s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  sensitivity();
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
