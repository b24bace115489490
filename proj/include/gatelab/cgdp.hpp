#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gatelab/gating.hpp"
#include "gatelab/scoring.hpp"

namespace gatelab {

struct Context {
  std::string name;
  double weight;
  std::vector<double> success;  // p(c, a) per action
  std::vector<double> reward;   // R(c, a) per action
};

// Every action is available in every context; the abstain action has p = R = 0.
class CGDPInstance {
 public:
  CGDPInstance(std::vector<Context> contexts, std::vector<std::string> actions, std::size_t abstain,
               double w_C, double w_A, Gate gate, ScoringRule rule);

  std::size_t num_contexts() const { return contexts_.size(); }
  std::size_t num_actions() const { return actions_.size(); }
  const Context& context(std::size_t c) const;
  const std::string& action_name(std::size_t a) const;
  std::size_t abstain() const { return abstain_; }
  std::size_t context_index(const std::string& name) const;
  std::size_t action_index(const std::string& name) const;

  double p(std::size_t c, std::size_t a) const;
  double R(std::size_t c, std::size_t a) const;
  double weight(std::size_t c) const { return context(c).weight; }
  double w_C() const { return w_C_; }
  double w_A() const { return w_A_; }
  const Gate& gate() const { return gate_; }
  const ScoringRule& rule() const { return rule_; }

  // argmax_a R(c, a), lowest index on ties.
  std::size_t optimal_action(std::size_t c) const;
  double max_reward() const;

 private:
  std::vector<Context> contexts_;
  std::vector<std::string> actions_;
  std::size_t abstain_;
  double w_C_, w_A_;
  Gate gate_;
  ScoringRule rule_;
};

double payoff(const CGDPInstance& inst, std::size_t c, std::size_t a, double r);

struct BindingSet {
  std::vector<bool> member;
  double mass = 0.0;
};

BindingSet binding_set(const CGDPInstance& inst);

enum class Disposition {
  autonomous,
  delegate,  // handed to a competent overseer who executes a*(c)
  veto,      // blocked outright; no task reward
};

struct PolicyChoice {
  std::size_t action;
  double report;
  Disposition disposition = Disposition::autonomous;
};

struct DeterministicPolicy {
  std::vector<PolicyChoice> choices;  // one per context
};

struct PolicyMetrics {
  double H = 0.0;
  double C = 0.0;
  double A = 0.0;
  std::optional<double> delta_bind;
  std::optional<double> delta_nonbind;
  double gating_accuracy = 0.0;
};

PolicyMetrics evaluate_policy(const CGDPInstance& inst, const DeterministicPolicy& pi);
// Convex combination of policy metrics; weights must sum to one.
PolicyMetrics evaluate_mixture(const CGDPInstance& inst, const std::vector<DeterministicPolicy>& policies,
                               const std::vector<double>& weights);

struct AskPermission {};
struct Sycophant {
  double delta;
};
struct ConservativeRefusal {};

DeterministicPolicy corner_policy(const CGDPInstance& inst, AskPermission);
DeterministicPolicy corner_policy(const CGDPInstance& inst, Sycophant s);
DeterministicPolicy corner_policy(const CGDPInstance& inst, ConservativeRefusal);
DeterministicPolicy truthful_policy(const CGDPInstance& inst);

struct TrilemmaVerdict {
  bool helpful = false;
  bool calibrated = false;
  bool autonomous = false;
  bool all_three() const { return helpful && calibrated && autonomous; }
};

double optimal_helpfulness(const CGDPInstance& inst);
// Expected calibration the policy would earn by reporting truthfully on its own actions.
double truthful_calibration(const CGDPInstance& inst, const DeterministicPolicy& pi);

TrilemmaVerdict check_trilemma(const CGDPInstance& inst, const DeterministicPolicy& pi, double eps);

struct TrilemmaSearch {
  bool found_all_three = false;
  std::optional<DeterministicPolicy> witness;
  std::size_t options_per_context = 0;
  std::size_t surviving_options = 0;
};

// Exhaustive search over (action, report-grid, disposition) per context. Each
// objective deficit is a weighted sum of non-negative per-context deficits, so
// options whose own deficit exceeds eps are discarded before the product is
// walked; the pruning is exact.
TrilemmaSearch exhaustive_trilemma_search(const CGDPInstance& inst, int report_steps = 100,
                                          double eps = 1e-6);

// feasible[c][a] marks pairs the agent may execute autonomously.
using FeasibilityMap = std::vector<std::vector<bool>>;

struct CommitmentResult {
  DeterministicPolicy policy;
  double predicted_A = 0.0;
};

CommitmentResult commitment_policy(const CGDPInstance& inst, const FeasibilityMap& feasible);
FeasibilityMap all_feasible(const CGDPInstance& inst);

struct SeparationBounds {
  double A_lower = 1.0;
  double H_loss_upper = 0.0;
};

SeparationBounds separation_bounds(const CGDPInstance& inst);
// Actor plays a*(c); a truthful critic vetoes whenever its report misses the gate.
DeterministicPolicy critic_veto_policy(const CGDPInstance& inst);

struct WelfareWeights {
  double w_H, w_C, w_A;
};

double weighted_welfare(const PolicyMetrics& m, const WelfareWeights& w);

// Two equal-weight contexts: s1 binds (a* has p = 0.5) with a safe alternative
// (p = 0.9, R = 0.4); s2 does not bind. Step gate at 0.7, Brier rule.
CGDPInstance toy_instance(double w_A = 0.05);

}  // namespace gatelab
