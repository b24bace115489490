#include "gatelab/cgdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace gatelab {

CGDPInstance::CGDPInstance(std::vector<Context> contexts, std::vector<std::string> actions,
                           std::size_t abstain, double w_C, double w_A, Gate gate, ScoringRule rule)
    : contexts_(std::move(contexts)),
      actions_(std::move(actions)),
      abstain_(abstain),
      w_C_(w_C),
      w_A_(w_A),
      gate_(std::move(gate)),
      rule_(std::move(rule)) {
  if (contexts_.empty()) throw std::invalid_argument("instance needs at least one context");
  if (actions_.empty() || abstain_ >= actions_.size())
    throw std::invalid_argument("abstain index outside the action set");
  if (!(w_C_ > 0.0)) throw std::invalid_argument("w_C must be positive");
  if (!(w_A_ >= 0.0)) throw std::invalid_argument("w_A must be non-negative");
  double total = 0.0;
  for (const auto& c : contexts_) {
    if (c.success.size() != actions_.size() || c.reward.size() != actions_.size())
      throw std::invalid_argument("context '" + c.name + "' must list p and R for every action");
    if (!(c.weight >= 0.0)) throw std::invalid_argument("context weights must be non-negative");
    for (std::size_t a = 0; a < actions_.size(); ++a) {
      if (!(c.success[a] >= 0 && c.success[a] <= 1 && c.reward[a] >= 0 && c.reward[a] <= 1))
        throw std::invalid_argument("p and R must lie in [0,1]");
    }
    if (c.success[abstain_] != 0.0 || c.reward[abstain_] != 0.0)
      throw std::invalid_argument("abstain must have p = R = 0 in context '" + c.name + "'");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("context weights must sum to 1");
}

const Context& CGDPInstance::context(std::size_t c) const {
  if (c >= contexts_.size()) throw std::out_of_range("unknown context index");
  return contexts_[c];
}

const std::string& CGDPInstance::action_name(std::size_t a) const {
  if (a >= actions_.size()) throw std::out_of_range("unknown action index");
  return actions_[a];
}

std::size_t CGDPInstance::context_index(const std::string& name) const {
  for (std::size_t i = 0; i < contexts_.size(); ++i)
    if (contexts_[i].name == name) return i;
  throw std::out_of_range("unknown context '" + name + "'");
}

std::size_t CGDPInstance::action_index(const std::string& name) const {
  for (std::size_t i = 0; i < actions_.size(); ++i)
    if (actions_[i] == name) return i;
  throw std::out_of_range("unknown action '" + name + "'");
}

double CGDPInstance::p(std::size_t c, std::size_t a) const {
  action_name(a);
  return context(c).success[a];
}

double CGDPInstance::R(std::size_t c, std::size_t a) const {
  action_name(a);
  return context(c).reward[a];
}

std::size_t CGDPInstance::optimal_action(std::size_t c) const {
  const auto& r = context(c).reward;
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

double CGDPInstance::max_reward() const {
  double m = 0.0;
  for (const auto& c : contexts_) m = std::max(m, *std::max_element(c.reward.begin(), c.reward.end()));
  return m;
}

double payoff(const CGDPInstance& inst, std::size_t c, std::size_t a, double r) {
  const double s = expected_score(inst.rule(), inst.rule().clip_report(r), inst.p(c, a));
  return inst.w_C() * s + inst.w_A() * approve_prob(inst.gate(), r) * inst.R(c, a);
}

BindingSet binding_set(const CGDPInstance& inst) {
  const double t = effective_threshold(inst.gate());
  BindingSet out;
  out.member.resize(inst.num_contexts());
  for (std::size_t c = 0; c < inst.num_contexts(); ++c) {
    out.member[c] = inst.p(c, inst.optimal_action(c)) < t;
    if (out.member[c]) out.mass += inst.weight(c);
  }
  return out;
}

namespace {

double truthful_score(const CGDPInstance& inst, double p) {
  return expected_score(inst.rule(), inst.rule().clip_report(p), p);
}

struct ContextOutcome {
  double h, c, a;
};

ContextOutcome context_outcome(const CGDPInstance& inst, std::size_t c, const PolicyChoice& ch) {
  const double p = inst.p(c, ch.action);
  ContextOutcome o{};
  o.c = expected_score(inst.rule(), inst.rule().clip_report(ch.report), p);
  switch (ch.disposition) {
    case Disposition::autonomous:
      o.h = inst.R(c, ch.action);
      // Abstaining never triggers the gate, so it costs no autonomy.
      o.a = ch.action == inst.abstain() ? 1.0 : approve_prob(inst.gate(), ch.report);
      break;
    case Disposition::delegate:
      o.h = inst.R(c, inst.optimal_action(c));
      o.a = 0.0;
      break;
    case Disposition::veto:
      o.h = 0.0;
      o.a = 0.0;
      break;
  }
  return o;
}

void check_policy(const CGDPInstance& inst, const DeterministicPolicy& pi) {
  if (pi.choices.size() != inst.num_contexts())
    throw std::invalid_argument("policy must define a choice for every context");
  for (const auto& ch : pi.choices) {
    inst.action_name(ch.action);
    if (!(ch.report >= 0.0 && ch.report <= 1.0)) throw std::invalid_argument("report must lie in [0,1]");
  }
}

}  // namespace

PolicyMetrics evaluate_policy(const CGDPInstance& inst, const DeterministicPolicy& pi) {
  check_policy(inst, pi);
  const auto bind = binding_set(inst);
  const double nominal = nominal_threshold(inst.gate());
  PolicyMetrics m;
  double bind_w = 0, bind_d = 0, free_w = 0, free_d = 0;
  for (std::size_t c = 0; c < inst.num_contexts(); ++c) {
    const auto& ch = pi.choices[c];
    const double w = inst.weight(c);
    const auto o = context_outcome(inst, c, ch);
    m.H += w * o.h;
    m.C += w * o.c;
    m.A += w * o.a;

    const double p = inst.p(c, ch.action);
    const double delta = ch.report - p;
    if (bind.member[c]) {
      bind_w += w;
      bind_d += w * delta;
    } else {
      free_w += w;
      free_d += w * delta;
    }
    const double q = approve_prob(inst.gate(), ch.report);
    m.gating_accuracy += w * (p >= nominal ? q : 1.0 - q);
  }
  if (bind_w > 0) m.delta_bind = bind_d / bind_w;
  if (free_w > 0) m.delta_nonbind = free_d / free_w;
  return m;
}

PolicyMetrics evaluate_mixture(const CGDPInstance& inst, const std::vector<DeterministicPolicy>& policies,
                               const std::vector<double>& weights) {
  if (policies.empty() || policies.size() != weights.size())
    throw std::invalid_argument("mixture needs one weight per policy");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("mixture weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");

  PolicyMetrics out;
  double bw = 0, bd = 0, fw = 0, fd = 0;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto m = evaluate_policy(inst, policies[i]);
    out.H += weights[i] * m.H;
    out.C += weights[i] * m.C;
    out.A += weights[i] * m.A;
    out.gating_accuracy += weights[i] * m.gating_accuracy;
    if (m.delta_bind) {
      bw += weights[i];
      bd += weights[i] * *m.delta_bind;
    }
    if (m.delta_nonbind) {
      fw += weights[i];
      fd += weights[i] * *m.delta_nonbind;
    }
  }
  if (bw > 0) out.delta_bind = bd / bw;
  if (fw > 0) out.delta_nonbind = fd / fw;
  return out;
}

DeterministicPolicy truthful_policy(const CGDPInstance& inst) {
  DeterministicPolicy pi;
  for (std::size_t c = 0; c < inst.num_contexts(); ++c) {
    const auto a = inst.optimal_action(c);
    pi.choices.push_back({a, inst.p(c, a), Disposition::autonomous});
  }
  return pi;
}

DeterministicPolicy corner_policy(const CGDPInstance& inst, AskPermission) {
  const double t = effective_threshold(inst.gate());
  DeterministicPolicy pi = truthful_policy(inst);
  for (auto& ch : pi.choices)
    if (ch.report < t) ch.disposition = Disposition::delegate;
  return pi;
}

DeterministicPolicy corner_policy(const CGDPInstance& inst, Sycophant s) {
  if (!(s.delta > 0.0)) throw std::invalid_argument("sycophant margin must be positive");
  const double t = effective_threshold(inst.gate());
  DeterministicPolicy pi = truthful_policy(inst);
  for (auto& ch : pi.choices) ch.report = std::min(1.0, std::max(ch.report, t + s.delta));
  return pi;
}

DeterministicPolicy corner_policy(const CGDPInstance& inst, ConservativeRefusal) {
  const double t = effective_threshold(inst.gate());
  DeterministicPolicy pi;
  for (std::size_t c = 0; c < inst.num_contexts(); ++c) {
    std::size_t pick = inst.abstain();
    bool found = false;
    for (std::size_t a = 0; a < inst.num_actions(); ++a) {
      if (a == inst.abstain() || inst.p(c, a) < t) continue;
      if (!found || inst.R(c, a) > inst.R(c, pick) ||
          (inst.R(c, a) == inst.R(c, pick) && inst.p(c, a) > inst.p(c, pick))) {
        pick = a;
        found = true;
      }
    }
    pi.choices.push_back({pick, inst.p(c, pick), Disposition::autonomous});
  }
  return pi;
}

double optimal_helpfulness(const CGDPInstance& inst) {
  double h = 0.0;
  for (std::size_t c = 0; c < inst.num_contexts(); ++c)
    h += inst.weight(c) * inst.R(c, inst.optimal_action(c));
  return h;
}

double truthful_calibration(const CGDPInstance& inst, const DeterministicPolicy& pi) {
  check_policy(inst, pi);
  double s = 0.0;
  for (std::size_t c = 0; c < inst.num_contexts(); ++c)
    s += inst.weight(c) * truthful_score(inst, inst.p(c, pi.choices[c].action));
  return s;
}

TrilemmaVerdict check_trilemma(const CGDPInstance& inst, const DeterministicPolicy& pi, double eps) {
  const auto m = evaluate_policy(inst, pi);
  TrilemmaVerdict v;
  v.helpful = m.H >= optimal_helpfulness(inst) - eps;
  v.calibrated = m.C >= truthful_calibration(inst, pi) - eps;
  v.autonomous = m.A >= 1.0 - eps;
  return v;
}

TrilemmaSearch exhaustive_trilemma_search(const CGDPInstance& inst, int report_steps, double eps) {
  if (inst.num_contexts() > 20 || inst.num_actions() > 5 || report_steps > 100 || report_steps < 1)
    throw std::invalid_argument("brute-force search is capped at 20 contexts, 5 actions, 101 reports");

  struct Option {
    PolicyChoice choice;
    double dH, dC, dA;
  };
  const Disposition dispositions[] = {Disposition::autonomous, Disposition::delegate, Disposition::veto};

  TrilemmaSearch out;
  out.options_per_context = inst.num_actions() * static_cast<std::size_t>(report_steps + 1) * 3;
  std::vector<std::vector<Option>> options(inst.num_contexts());
  for (std::size_t c = 0; c < inst.num_contexts(); ++c) {
    const double w = inst.weight(c);
    const double best_h = inst.R(c, inst.optimal_action(c));
    for (std::size_t a = 0; a < inst.num_actions(); ++a) {
      const double c_star = truthful_score(inst, inst.p(c, a));
      for (int i = 0; i <= report_steps; ++i) {
        const double r = static_cast<double>(i) / report_steps;
        for (auto d : dispositions) {
          const PolicyChoice ch{a, r, d};
          const auto o = context_outcome(inst, c, ch);
          Option opt{ch, w * (best_h - o.h), w * (c_star - o.c), w * (1.0 - o.a)};
          if (opt.dH <= eps && opt.dC <= eps && opt.dA <= eps) options[c].push_back(opt);
        }
      }
    }
    out.surviving_options += options[c].size();
    if (options[c].empty()) return out;
  }

  DeterministicPolicy current;
  current.choices.resize(inst.num_contexts());
  std::function<bool(std::size_t, double, double, double)> walk = [&](std::size_t c, double h, double s,
                                                                       double a) {
    if (h > eps || s > eps || a > eps) return false;
    if (c == inst.num_contexts()) return true;
    for (const auto& opt : options[c]) {
      current.choices[c] = opt.choice;
      if (walk(c + 1, h + opt.dH, s + opt.dC, a + opt.dA)) return true;
    }
    return false;
  };
  if (walk(0, 0, 0, 0)) {
    out.found_all_three = true;
    out.witness = current;
  }
  return out;
}

FeasibilityMap all_feasible(const CGDPInstance& inst) {
  return FeasibilityMap(inst.num_contexts(), std::vector<bool>(inst.num_actions(), true));
}

CommitmentResult commitment_policy(const CGDPInstance& inst, const FeasibilityMap& feasible) {
  if (feasible.size() != inst.num_contexts())
    throw std::invalid_argument("feasibility map must cover every context");
  const double t = effective_threshold(inst.gate());
  CommitmentResult out;
  for (std::size_t c = 0; c < inst.num_contexts(); ++c) {
    if (feasible[c].size() != inst.num_actions())
      throw std::invalid_argument("feasibility map must cover every action");
    const auto a = inst.optimal_action(c);
    const double p = inst.p(c, a);
    const bool go = feasible[c][a] && p >= t;
    out.policy.choices.push_back({a, p, go ? Disposition::autonomous : Disposition::delegate});
    if (go) out.predicted_A += inst.weight(c);
  }
  return out;
}

SeparationBounds separation_bounds(const CGDPInstance& inst) {
  const double mu = binding_set(inst).mass;
  return {1.0 - mu, mu * inst.max_reward()};
}

DeterministicPolicy critic_veto_policy(const CGDPInstance& inst) {
  const double t = effective_threshold(inst.gate());
  DeterministicPolicy pi = truthful_policy(inst);
  for (auto& ch : pi.choices)
    if (ch.report < t) ch.disposition = Disposition::veto;
  return pi;
}

double weighted_welfare(const PolicyMetrics& m, const WelfareWeights& w) {
  if (!(w.w_H > 0 && w.w_C > 0 && w.w_A > 0))
    throw std::invalid_argument("welfare weights must be strictly positive");
  return w.w_H * m.H + w.w_C * m.C + w.w_A * m.A;
}

CGDPInstance toy_instance(double w_A) {
  std::vector<Context> ctx{
      {"s1", 0.5, {0.5, 0.9, 0.0}, {1.0, 0.4, 0.0}},
      {"s2", 0.5, {0.9, 0.95, 0.0}, {1.0, 0.4, 0.0}},
  };
  return CGDPInstance(std::move(ctx), {"best", "safe", "abstain"}, 2, 1.0, w_A, Gate::step(0.7),
                      ScoringRule::brier());
}

}  // namespace gatelab
