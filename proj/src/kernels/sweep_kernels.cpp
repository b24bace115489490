#include <omp.h>

#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <exception>

#include "gatelab/rng.hpp"
#include "kernels/kernels.hpp"

namespace gatelab::kernels {

namespace {

int team_size(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

std::vector<Completion> bank_entry(const SweepPlan& plan, const CompletionSource& source, std::size_t k) {
  const auto& spec = plan.spec;
  const std::size_t s = k / spec.tasks.size();
  const std::size_t t = k % spec.tasks.size();
  return source.draw(spec.tasks[t], spec.seeds[s], static_cast<std::size_t>(plan.n_max));
}

}  // namespace

CompletionBank fill_bank_serial(const SweepPlan& plan, const CompletionSource& source) {
  CompletionBank bank(plan.spec.seeds.size() * plan.spec.tasks.size());
  for (std::size_t k = 0; k < bank.size(); ++k) bank[k] = bank_entry(plan, source, k);
  return bank;
}

CompletionBank fill_bank_omp(const SweepPlan& plan, const CompletionSource& source, int threads) {
  CompletionBank bank(plan.spec.seeds.size() * plan.spec.tasks.size());
  const auto total = static_cast<long>(bank.size());
  // Exceptions may not cross the parallel region; keep the first and rethrow.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(team_size(threads))
  for (long k = 0; k < total; ++k) {
    try {
      bank[k] = bank_entry(plan, source, static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(gatelab_bank_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return bank;
}

SweepRecord sweep_cell(const SweepPlan& plan, const CompletionBank& bank, std::size_t config, std::size_t seed_index,
                       std::size_t task_index) {
  const auto& spec = plan.spec;
  const auto& g = spec.grid;
  const std::size_t iRmin = config % g.r_min.size();
  const std::size_t iRatio = (config / g.r_min.size()) % g.ratio.size();
  const std::size_t iN = config / (g.r_min.size() * g.ratio.size());
  const int N = g.N[iN];
  const double ratio = g.ratio[iRatio];
  const double r_min = g.r_min[iRmin];
  const double w_C = spec.w_C;
  const double w_A = ratio * w_C;
  const Task& task = spec.tasks[task_index];
  const double p_hat = spec.binding.p_hat[task_index];

  const auto& all = bank[seed_index * spec.tasks.size() + task_index];
  const std::span<const Completion> pool(all.data(), static_cast<std::size_t>(N));

  std::size_t pick = 0;
  if (spec.selector == Selector::uniform_random) {
    Engine eng = make_engine({stream::random_select, spec.seeds[seed_index], iN, iRatio, iRmin,
                              static_cast<std::uint64_t>(task.id)});
    pick = boost::random::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(eng);
  } else {
    switch (spec.mode) {
      case PayoffMode::oracle:
        pick = select_best(pool, [&](const Completion& c) { return selection_payoff(c.report, c.outcome, w_C, w_A, r_min); });
        break;
      case PayoffMode::proxy:
        pick = select_best(pool, [&](const Completion& c) { return proxy_payoff(c.report, w_C, w_A, r_min); });
        break;
      case PayoffMode::expected:
        pick = select_best(pool, [&](const Completion& c) { return expected_payoff(c.report, p_hat, w_C, w_A, r_min); });
        break;
    }
  }
  const Completion& c = pool[pick];

  SweepRecord rec;
  rec.config_id = static_cast<std::uint32_t>(config);
  rec.seed = spec.seeds[seed_index];
  rec.N = N;
  rec.ratio = ratio;
  rec.r_min = r_min;
  rec.mode = spec.selector == Selector::uniform_random ? "random" : to_string(spec.mode);
  rec.task_id = task.id;
  rec.category = task.category;
  rec.p_true = std::isfinite(task.p_true) ? task.p_true : p_hat;
  rec.binding = spec.binding.flags[task_index][iRmin];
  rec.r_sel = c.report;
  rec.y_sel = c.outcome;
  switch (spec.mode) {
    case PayoffMode::proxy: rec.payoff_sel = proxy_payoff(c.report, w_C, w_A, r_min); break;
    case PayoffMode::expected: rec.payoff_sel = expected_payoff(c.report, p_hat, w_C, w_A, r_min); break;
    case PayoffMode::oracle: rec.payoff_sel = selection_payoff(c.report, c.outcome, w_C, w_A, r_min); break;
  }
  return rec;
}

std::vector<SweepRecord> sweep_cells_serial(const SweepPlan& plan, const CompletionBank& bank) {
  const std::size_t tasks = plan.spec.tasks.size(), seeds = plan.spec.seeds.size();
  std::vector<SweepRecord> out(plan.spec.grid.configs() * seeds * tasks);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = sweep_cell(plan, bank, k / (seeds * tasks), (k / tasks) % seeds, k % tasks);
  return out;
}

std::vector<SweepRecord> sweep_cells_omp(const SweepPlan& plan, const CompletionBank& bank, int threads) {
  const std::size_t tasks = plan.spec.tasks.size(), seeds = plan.spec.seeds.size();
  std::vector<SweepRecord> out(plan.spec.grid.configs() * seeds * tasks);
  const auto total = static_cast<long>(out.size());
#pragma omp parallel for schedule(static) num_threads(team_size(threads))
  for (long k = 0; k < total; ++k) {
    const auto u = static_cast<std::size_t>(k);
    out[u] = sweep_cell(plan, bank, u / (seeds * tasks), (u / tasks) % seeds, u % tasks);
  }
  return out;
}

}  // namespace gatelab::kernels
