#include "gatelab/bon.hpp"

#include <algorithm>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <map>
#include <set>

#include "kernels/kernels.hpp"

namespace gatelab {

std::string to_string(TaskCategory c) {
  switch (c) {
    case TaskCategory::arithmetic: return "arithmetic";
    case TaskCategory::factual: return "factual";
    case TaskCategory::code: return "code";
  }
  return "?";
}

TaskCategory parse_category(const std::string& s) {
  if (s == "arithmetic") return TaskCategory::arithmetic;
  if (s == "factual") return TaskCategory::factual;
  if (s == "code") return TaskCategory::code;
  throw std::invalid_argument("unknown task category '" + s + "'");
}

std::string to_string(PayoffMode m) {
  switch (m) {
    case PayoffMode::oracle: return "oracle";
    case PayoffMode::proxy: return "proxy";
    case PayoffMode::expected: return "expected";
  }
  return "?";
}

PayoffMode parse_payoff_mode(const std::string& s) {
  if (s == "oracle") return PayoffMode::oracle;
  if (s == "proxy") return PayoffMode::proxy;
  if (s == "expected") return PayoffMode::expected;
  throw std::invalid_argument("unknown payoff mode '" + s + "' (expected oracle|proxy|expected)");
}

std::vector<DifficultyStratum> default_strata() {
  return {{72, 0.05, 0.45}, {1, 0.5, 0.7}, {3, 0.7, 0.9}, {24, 0.9, 0.99}};
}

std::vector<Task> make_synthetic_tasks(std::span<const DifficultyStratum> strata, std::uint64_t seed) {
  Engine eng = make_engine({stream::tasks, seed});
  const TaskCategory cycle[] = {TaskCategory::arithmetic, TaskCategory::factual, TaskCategory::code};
  std::vector<Task> tasks;
  for (const auto& s : strata) {
    if (!(s.lo >= 0 && s.hi <= 1 && s.lo <= s.hi)) throw std::invalid_argument("stratum bounds must lie in [0,1]");
    boost::random::uniform_real_distribution<double> u(s.lo, s.hi);
    for (std::size_t i = 0; i < s.count; ++i) {
      Task t;
      t.id = static_cast<int>(tasks.size());
      t.category = cycle[tasks.size() % 3];
      t.p_true = s.lo == s.hi ? s.lo : u(eng);
      tasks.push_back(std::move(t));
    }
  }
  if (tasks.empty()) throw std::invalid_argument("synthetic task set is empty");
  return tasks;
}

void validate(const SyntheticAgent& a) {
  if (!(a.kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (!(a.coupling >= 0 && a.coupling <= 1)) throw std::invalid_argument("coupling must lie in [0,1]");
  if (!(a.clip_lo > 0 && a.clip_lo < a.clip_hi && a.clip_hi < 1))
    throw std::invalid_argument("report clip bounds must satisfy 0 < lo < hi < 1");
}

std::vector<Completion> generate_completions(const Task& task, const SyntheticAgent& agent, std::size_t n,
                                             Engine& rng) {
  validate(agent);
  if (n < 1) throw std::invalid_argument("need at least one completion");
  if (!(task.p_true >= 0 && task.p_true <= 1)) throw std::invalid_argument("synthetic task needs p_true in [0,1]");
  boost::random::uniform_01<double> unif;
  std::vector<Completion> out(n);
  for (auto& c : out) {
    c.outcome = unif(rng) < task.p_true ? 1 : 0;
    const double m = std::clamp((1.0 - agent.coupling) * task.p_true + agent.coupling * c.outcome, agent.clip_lo,
                                agent.clip_hi);
    boost::random::beta_distribution<double> beta(m * agent.kappa, (1.0 - m) * agent.kappa);
    c.report = std::clamp(beta(rng), agent.clip_lo, agent.clip_hi);
  }
  return out;
}

SyntheticSource::SyntheticSource(SyntheticAgent agent) : agent_(agent) { validate(agent_); }

std::vector<Completion> SyntheticSource::draw(const Task& task, std::uint64_t seed, std::size_t n) const {
  Engine eng = make_engine({stream::completions, seed, static_cast<std::uint64_t>(task.id)});
  return generate_completions(task, agent_, n, eng);
}

double selection_payoff(double r, int y, double w_C, double w_A, double r_min) {
  return -w_C * (r - y) * (r - y) + (r >= r_min ? w_A : 0.0);
}

double proxy_payoff(double r, double w_C, double w_A, double r_min) {
  return -w_C * r * (1.0 - r) + (r >= r_min ? w_A : 0.0);
}

double expected_payoff(double r, double p_hat, double w_C, double w_A, double r_min) {
  return -w_C * (r - p_hat) * (r - p_hat) + (r >= r_min ? w_A : 0.0);
}

std::size_t select_best(std::span<const Completion> completions,
                        const std::function<double(const Completion&)>& payoff) {
  if (completions.empty()) throw std::invalid_argument("cannot select from an empty completion list");
  std::size_t best = 0;
  double best_v = payoff(completions[0]);
  for (std::size_t i = 1; i < completions.size(); ++i) {
    const double v = payoff(completions[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

void validate(const SweepGrid& g) {
  if (g.N.empty() || g.ratio.empty() || g.r_min.empty()) throw std::invalid_argument("sweep grids must be non-empty");
  for (int n : g.N)
    if (n < 1) throw std::invalid_argument("N must be at least 1");
  for (double w : g.ratio)
    if (!(w >= 0)) throw std::invalid_argument("weight ratios must be non-negative");
  for (double t : g.r_min)
    if (!(t > 0 && t < 1)) throw std::invalid_argument("r_min must lie in (0,1)");
}

namespace {

void check_disjoint(std::span<const std::uint64_t> experimental, std::span<const std::uint64_t> heldout) {
  std::set<std::uint64_t> seen(experimental.begin(), experimental.end());
  for (auto s : heldout)
    if (seen.count(s)) throw SeedOverlapError("held-out seed " + std::to_string(s) + " is also an experimental seed");
}

}  // namespace

BindingEstimate estimate_binding_set(const std::vector<std::vector<int>>& heldout_outcomes, std::span<const Task> tasks,
                                     std::span<const double> r_min_grid,
                                     std::span<const std::uint64_t> experimental_seeds,
                                     std::span<const std::uint64_t> heldout_seeds) {
  check_disjoint(experimental_seeds, heldout_seeds);
  if (heldout_seeds.empty()) throw std::invalid_argument("binding estimation needs held-out seeds");
  if (heldout_outcomes.size() != tasks.size()) throw std::invalid_argument("need held-out outcomes for every task");
  BindingEstimate est;
  est.r_min.assign(r_min_grid.begin(), r_min_grid.end());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& ys = heldout_outcomes[t];
    if (ys.size() != heldout_seeds.size()) throw std::invalid_argument("need one held-out outcome per seed");
    double hits = 0;
    for (int y : ys) hits += y;
    const double p_hat = hits / static_cast<double>(ys.size());
    est.task_ids.push_back(tasks[t].id);
    est.p_hat.push_back(p_hat);
    std::vector<bool> row;
    for (double r : r_min_grid) row.push_back(p_hat < r);
    est.flags.push_back(std::move(row));
  }
  return est;
}

BindingEstimate estimate_binding_set(const CompletionSource& source, std::span<const Task> tasks,
                                     std::span<const double> r_min_grid,
                                     std::span<const std::uint64_t> experimental_seeds,
                                     std::span<const std::uint64_t> heldout_seeds) {
  check_disjoint(experimental_seeds, heldout_seeds);
  std::vector<std::vector<int>> outcomes(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t)
    for (auto s : heldout_seeds) outcomes[t].push_back(source.draw(tasks[t], s, 1).front().outcome);
  return estimate_binding_set(outcomes, tasks, r_min_grid, experimental_seeds, heldout_seeds);
}

std::uint32_t config_id(const SweepGrid& g, std::size_t iN, std::size_t iRatio, std::size_t iRmin) {
  return static_cast<std::uint32_t>((iN * g.ratio.size() + iRatio) * g.r_min.size() + iRmin);
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const CompletionSource& source, Execution exec) {
  validate(spec.grid);
  if (spec.tasks.empty()) throw std::invalid_argument("sweep needs at least one task");
  if (spec.seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  std::set<std::uint64_t> distinct(spec.seeds.begin(), spec.seeds.end());
  if (distinct.size() != spec.seeds.size()) throw std::invalid_argument("experimental seeds must be distinct");
  if (spec.binding.flags.size() != spec.tasks.size() || spec.binding.r_min != spec.grid.r_min)
    throw std::invalid_argument("binding estimate must cover every task at every r_min of the grid");

  kernels::SweepPlan plan{spec, *std::max_element(spec.grid.N.begin(), spec.grid.N.end())};
  kernels::CompletionBank bank = exec.is_serial() ? kernels::fill_bank_serial(plan, source)
                                                  : kernels::fill_bank_omp(plan, source, exec.threads);
  return exec.is_serial() ? kernels::sweep_cells_serial(plan, bank) : kernels::sweep_cells_omp(plan, bank, exec.threads);
}

ConfigMetrics config_metrics(std::span<const SweepRecord> records, double eps) {
  if (records.empty()) throw std::invalid_argument("config metrics need at least one record");
  const double r_min = records.front().r_min;
  ConfigMetrics m;
  double bind_sum = 0, free_sum = 0, correct = 0;
  std::size_t free_n = 0;
  for (const auto& rec : records) {
    if (rec.r_min != r_min) throw std::invalid_argument("config metrics need records that share one r_min");
    const bool approved = rec.r_sel >= r_min;
    m.brier += (rec.r_sel - rec.y_sel) * (rec.r_sel - rec.y_sel);
    m.H += rec.y_sel;
    m.A += approved ? 1.0 : 0.0;
    correct += approved == !rec.binding ? 1.0 : 0.0;
    const double delta = rec.r_sel - rec.p_true;
    if (rec.binding) {
      ++m.binding_count;
      bind_sum += delta;
      if (rec.r_sel >= r_min && rec.r_sel <= r_min + eps) ++m.threshold_hits;
    } else {
      ++free_n;
      free_sum += delta;
    }
  }
  const double n = static_cast<double>(records.size());
  m.n = records.size();
  m.brier /= n;
  m.H /= n;
  m.A /= n;
  m.gating_accuracy = correct / n;
  if (m.binding_count > 0) {
    m.delta_bind = bind_sum / static_cast<double>(m.binding_count);
    m.threshold_mass = static_cast<double>(m.threshold_hits) / static_cast<double>(m.binding_count);
  }
  if (free_n > 0) m.delta_nonbind = free_sum / static_cast<double>(free_n);
  return m;
}

std::vector<SurfacePoint> surface(std::span<const SweepRecord> records, int N, double r_min) {
  struct Acc {
    double n = 0, y = 0, bs = 0, a = 0;
  };
  std::map<double, Acc> by_ratio;
  for (const auto& rec : records) {
    if (rec.N != N || rec.r_min != r_min) continue;
    auto& acc = by_ratio[rec.ratio];
    acc.n += 1;
    acc.y += rec.y_sel;
    acc.bs += (rec.r_sel - rec.y_sel) * (rec.r_sel - rec.y_sel);
    acc.a += rec.r_sel >= r_min ? 1.0 : 0.0;
  }
  std::vector<SurfacePoint> out;
  for (const auto& [w, acc] : by_ratio) out.push_back({w, acc.y / acc.n, 1.0 - acc.bs / acc.n, acc.a / acc.n});
  return out;
}

MidpointResult midpoint_violation_rate(std::span<const SurfacePoint> points, double slack) {
  std::vector<SurfacePoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].ratio == pts[i - 1].ratio) throw std::invalid_argument("surface has duplicate weight ratios");
  if (pts.size() < 3) throw std::invalid_argument("midpoint test needs at least three weight ratios");

  MidpointResult out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const auto &a = pts[i], &m = pts[j], &b = pts[k];
        const double t = (m.ratio - a.ratio) / (b.ratio - a.ratio);
        auto below = [&](double va, double vm, double vb) { return vm < va + t * (vb - va) - slack; };
        unsigned axes = 0;
        if (below(a.H, m.H, b.H)) axes |= 1u;
        if (below(a.C, m.C, b.C)) axes |= 2u;
        if (below(a.A, m.A, b.A)) axes |= 4u;
        ++out.triples;
        if (axes) out.violations.push_back({a.ratio, m.ratio, b.ratio, axes});
      }
  out.rate = static_cast<double>(out.violations.size()) / static_cast<double>(out.triples);
  return out;
}

}  // namespace gatelab
