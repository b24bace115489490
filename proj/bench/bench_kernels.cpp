// Times each serial reference kernel against its OpenMP counterpart and checks
// that both return identical results.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <thread>

#include "gatelab/stats.hpp"
#include "kernels/kernels.hpp"

using namespace gatelab;

namespace {

template <class F>
auto timed(int reps, F&& f, double& best_ms) {
  best_ms = 1e300;
  decltype(f()) out{};
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    out = f();
    best_ms = std::min(best_ms, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return out;
}

void report(const char* name, double serial_ms, double omp_ms, bool identical) {
  std::printf("%-18s %12.2f %12.2f %9.2fx  %s\n", name, serial_ms, omp_ms, serial_ms / omp_ms,
              identical ? "identical" : "MISMATCH");
}

bool same(const std::vector<SweepRecord>& a, const std::vector<SweepRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].r_sel != b[k].r_sel || a[k].y_sel != b[k].y_sel || a[k].payoff_sel != b[k].payoff_sel ||
        a[k].task_id != b[k].task_id || a[k].config_id != b[k].config_id)
      return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int reps = 3;
  app.add_option("--threads", threads, "OpenMP team size")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "repetitions per kernel (best time is reported)")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::printf("threads=%d reps=%d\n%-18s %12s %12s %10s\n", threads, reps, "kernel", "serial ms", "omp ms", "speedup");
  bool ok = true;

  {
    const SyntheticSource source{SyntheticAgent{}};
    SweepSpec spec;
    spec.tasks = make_synthetic_tasks(default_strata(), 0);
    spec.seeds = {0, 42, 123, 456, 789};
    std::vector<std::uint64_t> held(20);
    std::iota(held.begin(), held.end(), 1000);
    spec.binding = estimate_binding_set(source, spec.tasks, spec.grid.r_min, spec.seeds, held);
    const kernels::SweepPlan plan{spec, spec.grid.N.back()};
    double s_ms, p_ms;
    const auto bank = timed(reps, [&] { return kernels::fill_bank_serial(plan, source); }, s_ms);
    const auto bank_p = timed(reps, [&] { return kernels::fill_bank_omp(plan, source, threads); }, p_ms);
    bool same_bank = bank.size() == bank_p.size();
    for (std::size_t k = 0; same_bank && k < bank.size(); ++k)
      for (std::size_t i = 0; i < bank[k].size(); ++i) same_bank = same_bank && bank[k][i].report == bank_p[k][i].report;
    report("completion bank", s_ms, p_ms, same_bank);
    const auto ref = timed(reps, [&] { return kernels::sweep_cells_serial(plan, bank); }, s_ms);
    const auto par = timed(reps, [&] { return kernels::sweep_cells_omp(plan, bank, threads); }, p_ms);
    report("sweep cells", s_ms, p_ms, same(ref, par));
    ok = ok && same_bank && same(ref, par);
  }
  {
    const GaussianReportPolicy pol{0.5, 0.1};
    const PayoffFn V = [](double r) { return -(r - 0.5) * (r - 0.5) + (r >= 0.7 ? 1.0 : 0.0); };
    double s_ms, p_ms;
    const auto ref = timed(reps, [&] { return kernels::score_moments_serial(pol, V, 4'000'000, 1); }, s_ms);
    const auto par = timed(reps, [&] { return kernels::score_moments_omp(pol, V, 4'000'000, 1, threads); }, p_ms);
    const bool eq = ref.sum == par.sum && ref.sum_sq == par.sum_sq;
    report("monte carlo", s_ms, p_ms, eq);
    ok = ok && eq;
  }
  {
    std::vector<double> x(2000);
    std::iota(x.begin(), x.end(), 0.0);
    double s_ms, p_ms;
    const auto ref = timed(reps, [&] { return kernels::bootstrap_stats_serial(x, mean_of, 10000, 2); }, s_ms);
    const auto par = timed(reps, [&] { return kernels::bootstrap_stats_omp(x, mean_of, 10000, 2, threads); }, p_ms);
    report("bootstrap", s_ms, p_ms, ref == par);
    ok = ok && ref == par;
  }
  {
    const PrincipalSpec spec{0.6, 1.0, 1.0, 1.0, 0.04, ScoringRule::brier()};
    const auto F = TypeDistribution::uniform_nodes(1001);
    double s_ms, p_ms;
    const auto ref = timed(reps, [&] { return kernels::affine_utilities_serial(spec, F, 50); }, s_ms);
    const auto par = timed(reps, [&] { return kernels::affine_utilities_omp(spec, F, 50, threads); }, p_ms);
    report("affine search", s_ms, p_ms, ref == par);
    ok = ok && ref == par;
  }
  return ok ? 0 : 1;
}
