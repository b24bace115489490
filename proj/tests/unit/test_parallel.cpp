// Serial reference kernels against their OpenMP counterparts: results must be
// bitwise identical for every team size.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "gatelab/stats.hpp"
#include "kernels/kernels.hpp"

using namespace gatelab;

namespace {

bool same(const SweepRecord& a, const SweepRecord& b) {
  return a.config_id == b.config_id && a.seed == b.seed && a.task_id == b.task_id && a.r_sel == b.r_sel &&
         a.y_sel == b.y_sel && a.payoff_sel == b.payoff_sel && a.binding == b.binding && a.mode == b.mode;
}

SweepSpec small_spec(Selector sel, PayoffMode mode) {
  SweepSpec spec;
  spec.tasks = make_synthetic_tasks(std::vector<DifficultyStratum>{{12, 0.1, 0.5}, {6, 0.8, 0.95}}, 3);
  spec.grid.N = {1, 3, 8};
  spec.grid.ratio = {0.0, 1.0, 4.0};
  spec.grid.r_min = {0.5, 0.7};
  spec.seeds = {1, 2, 3};
  spec.mode = mode;
  spec.selector = sel;
  std::vector<std::uint64_t> held(10);
  std::iota(held.begin(), held.end(), 500);
  spec.binding = estimate_binding_set(SyntheticSource{SyntheticAgent{}}, spec.tasks, spec.grid.r_min, spec.seeds, held);
  return spec;
}

}  // namespace

TEST_CASE("sweep kernels") {
  const SyntheticSource source{SyntheticAgent{}};
  for (auto sel : {Selector::argmax, Selector::uniform_random})
    for (auto mode : {PayoffMode::oracle, PayoffMode::proxy, PayoffMode::expected}) {
      const auto spec = small_spec(sel, mode);
      const kernels::SweepPlan plan{spec, 8};
      const auto bank = kernels::fill_bank_serial(plan, source);
      const auto ref = kernels::sweep_cells_serial(plan, bank);
      for (int threads : {1, 2, 5}) {
        const auto bank_p = kernels::fill_bank_omp(plan, source, threads);
        REQUIRE(bank_p.size() == bank.size());
        for (std::size_t k = 0; k < bank.size(); ++k)
          for (std::size_t i = 0; i < bank[k].size(); ++i) CHECK(bank_p[k][i].report == bank[k][i].report);
        const auto par = kernels::sweep_cells_omp(plan, bank_p, threads);
        REQUIRE(par.size() == ref.size());
        for (std::size_t k = 0; k < ref.size(); ++k) CHECK(same(par[k], ref[k]));
      }
    }
}

TEST_CASE("bank failures surface from parallel fills") {
  struct Failing : CompletionSource {
    std::vector<Completion> draw(const Task& t, std::uint64_t, std::size_t) const override {
      if (t.id == 5) throw std::runtime_error("endpoint down");
      return {Completion{}};
    }
  };
  const auto spec = small_spec(Selector::argmax, PayoffMode::oracle);
  const kernels::SweepPlan plan{spec, 1};
  CHECK_THROWS_WITH_AS(kernels::fill_bank_omp(plan, Failing{}, 3), "endpoint down", std::runtime_error);
}

TEST_CASE("Monte Carlo moments") {
  const GaussianReportPolicy pol{0.5, 0.1};
  const PayoffFn V = [](double r) { return -(r - 0.5) * (r - 0.5) + (r >= 0.7 ? 1.0 : 0.0); };
  for (std::size_t n : {1000ul, 65536ul, 200001ul}) {
    const auto ref = kernels::score_moments_serial(pol, V, n, 9);
    for (int threads : {1, 3, 4}) {
      const auto par = kernels::score_moments_omp(pol, V, n, 9, threads);
      CHECK(par.sum == ref.sum);
      CHECK(par.sum_sq == ref.sum_sq);
    }
  }
}

TEST_CASE("bootstrap resamples") {
  std::vector<double> x(57);
  std::iota(x.begin(), x.end(), 0.0);
  const auto ref = kernels::bootstrap_stats_serial(x, mean_of, 1000, 4);
  for (int threads : {2, 7}) CHECK(kernels::bootstrap_stats_omp(x, mean_of, 1000, 4, threads) == ref);
  CHECK(bootstrap_ci(x, mean_of, 1000, 0.95, 4, Execution::parallel(3)).lo ==
        bootstrap_ci(x, mean_of, 1000, 0.95, 4).lo);
}

TEST_CASE("affine gate search") {
  const PrincipalSpec spec{0.6, 1.0, 1.0, 1.0, 0.04, ScoringRule::brier()};
  const auto F = TypeDistribution::uniform_nodes(101);
  const auto ref = kernels::affine_utilities_serial(spec, F, 20);
  CHECK(ref.size() == 400);
  for (int threads : {2, 3}) CHECK(kernels::affine_utilities_omp(spec, F, 20, threads) == ref);
  const auto p = kernels::affine_grid_point(20, 399);
  CHECK(p.first == 1.0);
  CHECK(p.second == 0.0);
}
