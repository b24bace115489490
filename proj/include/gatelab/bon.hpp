#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gatelab/execution.hpp"
#include "gatelab/rng.hpp"

namespace gatelab {

enum class TaskCategory { arithmetic, factual, code };

std::string to_string(TaskCategory c);
TaskCategory parse_category(const std::string& s);

struct Task {
  int id = 0;
  TaskCategory category = TaskCategory::arithmetic;
  double p_true = 0.0;    // NaN when unknown (LLM mode)
  std::string question;   // LLM mode only
  std::string reference;  // LLM mode only
};

// Latent success probability for task.binding at threshold t is p_true < t.
inline bool binding_flag(const Task& task, double r_min) { return task.p_true < r_min; }

struct DifficultyStratum {
  std::size_t count;
  double lo, hi;
};

// 72 hard, 1 medium, 3 near-threshold and 24 easy tasks.
std::vector<DifficultyStratum> default_strata();

// p_true ~ Uniform(lo, hi) within each stratum; categories cycle through
// arithmetic, factual, code.
std::vector<Task> make_synthetic_tasks(std::span<const DifficultyStratum> strata, std::uint64_t seed);

struct SyntheticAgent {
  double kappa = 8.0;
  // Shifts each report's mean toward its own outcome: m = (1 - rho) p + rho y.
  double coupling = 0.0;
  double clip_lo = 0.005;
  double clip_hi = 0.995;
};

void validate(const SyntheticAgent& agent);

struct Completion {
  double report = 0.0;
  int outcome = 0;
  std::string text;
  std::vector<double> token_logprobs;
};

// y ~ Bernoulli(p_true), then r ~ Beta with mean m and concentration kappa,
// clipped to [clip_lo, clip_hi].
std::vector<Completion> generate_completions(const Task& task, const SyntheticAgent& agent, std::size_t n,
                                             Engine& rng);

// Draws completions for a (task, seed) stream. Requests for fewer
// completions return a prefix of longer ones where the source allows it.
class CompletionSource {
 public:
  virtual ~CompletionSource() = default;
  virtual std::vector<Completion> draw(const Task& task, std::uint64_t seed, std::size_t n) const = 0;
};

class SyntheticSource : public CompletionSource {
 public:
  explicit SyntheticSource(SyntheticAgent agent);
  std::vector<Completion> draw(const Task& task, std::uint64_t seed, std::size_t n) const override;

 private:
  SyntheticAgent agent_;
};

double selection_payoff(double r, int y, double w_C, double w_A, double r_min);
double proxy_payoff(double r, double w_C, double w_A, double r_min);
// Oracle payoff with the outcome replaced by a frozen held-out estimate.
double expected_payoff(double r, double p_hat, double w_C, double w_A, double r_min);

enum class PayoffMode { oracle, proxy, expected };
enum class Selector { argmax, uniform_random };

std::string to_string(PayoffMode m);
PayoffMode parse_payoff_mode(const std::string& s);

std::size_t select_best(std::span<const Completion> completions, const std::function<double(const Completion&)>& payoff);

struct SweepGrid {
  std::vector<int> N{1, 2, 4, 8, 16, 32};
  std::vector<double> ratio{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> r_min{0.5, 0.7, 0.9};

  std::size_t configs() const { return N.size() * ratio.size() * r_min.size(); }
};

void validate(const SweepGrid& grid);

class SeedOverlapError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BindingEstimate {
  std::vector<int> task_ids;
  std::vector<double> p_hat;
  std::vector<double> r_min;
  std::vector<std::vector<bool>> flags;  // [task][r_min index]
};

// heldout_outcomes[t] holds one outcome per held-out seed for task t.
BindingEstimate estimate_binding_set(const std::vector<std::vector<int>>& heldout_outcomes, std::span<const Task> tasks,
                                     std::span<const double> r_min_grid,
                                     std::span<const std::uint64_t> experimental_seeds,
                                     std::span<const std::uint64_t> heldout_seeds);

// Uses the first completion of each held-out (task, seed) stream.
BindingEstimate estimate_binding_set(const CompletionSource& source, std::span<const Task> tasks,
                                     std::span<const double> r_min_grid,
                                     std::span<const std::uint64_t> experimental_seeds,
                                     std::span<const std::uint64_t> heldout_seeds);

struct SweepRecord {
  std::uint32_t config_id = 0;
  std::uint64_t seed = 0;
  int N = 1;
  double ratio = 0.0;
  double r_min = 0.5;
  std::string mode;  // oracle | proxy | expected | random
  int task_id = 0;
  TaskCategory category = TaskCategory::arithmetic;
  double p_true = 0.0;
  bool binding = false;
  double r_sel = 0.0;
  int y_sel = 0;
  double payoff_sel = 0.0;
};

struct SweepSpec {
  std::vector<Task> tasks;
  SweepGrid grid;
  std::vector<std::uint64_t> seeds;
  PayoffMode mode = PayoffMode::oracle;
  Selector selector = Selector::argmax;
  double w_C = 1.0;
  BindingEstimate binding;
};

std::uint32_t config_id(const SweepGrid& grid, std::size_t iN, std::size_t iRatio, std::size_t iRmin);

// One record per (config, seed, task), ordered by config, then seed, then task.
// Every cell of a (seed, task) pair selects from prefixes of the same
// completion stream; the random selector uses its own per-cell stream.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const CompletionSource& source,
                                   Execution exec = Execution::serial());

struct ConfigMetrics {
  std::size_t n = 0;
  double brier = 0.0;
  double H = 0.0;
  double A = 0.0;
  std::optional<double> delta_bind;
  std::optional<double> delta_nonbind;
  double gating_accuracy = 0.0;
  std::optional<double> threshold_mass;
  std::size_t threshold_hits = 0;
  std::size_t binding_count = 0;
};

// Aggregates records that share one r_min. Delta is measured against the
// record's p_true column.
ConfigMetrics config_metrics(std::span<const SweepRecord> records, double eps = 0.1);

struct SurfacePoint {
  double ratio;
  double H, C, A;
};

// One point per ratio for the given (N, r_min) slice; C = 1 - BS.
std::vector<SurfacePoint> surface(std::span<const SweepRecord> records, int N, double r_min);

struct MidpointViolation {
  double w_i, w_j, w_k;
  unsigned axes;  // bit 0 = H, bit 1 = C, bit 2 = A
};

struct MidpointResult {
  double rate = 0.0;
  std::size_t triples = 0;
  std::vector<MidpointViolation> violations;
};

MidpointResult midpoint_violation_rate(std::span<const SurfacePoint> surface, double slack = 0.05);

}  // namespace gatelab
