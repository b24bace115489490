#include "gatelab/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace gatelab {

ScoringRule ScoringRule::brier() { return ScoringRule(RuleKind::brier, "brier"); }

ScoringRule ScoringRule::log() { return ScoringRule(RuleKind::log, "log"); }

ScoringRule ScoringRule::custom(std::string name, Fn generator, Fn first, Fn second) {
  if (!generator || !first || !second)
    throw std::invalid_argument("custom scoring rule needs G, G' and G''");
  ScoringRule rule(RuleKind::custom, std::move(name));
  rule.generator_ = std::move(generator);
  rule.first_ = std::move(first);
  rule.second_ = std::move(second);
  return rule;
}

namespace {

void require_unit(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::domain_error(std::string(what) + " must lie in [0,1]");
}

void require_log_interior(double r) {
  if (!(r > 0.0 && r < 1.0))
    throw std::domain_error("log score is unbounded at r in {0,1}; clip the report first");
}

}  // namespace

double ScoringRule::generator(double r) const {
  switch (kind_) {
    case RuleKind::brier: return r * r - r;
    case RuleKind::log:
      require_log_interior(r);
      return r * std::log(r) + (1.0 - r) * std::log1p(-r);
    case RuleKind::custom: return generator_(r);
  }
  return 0.0;
}

double ScoringRule::g1(double r) const {
  switch (kind_) {
    case RuleKind::brier: return 2.0 * r - 1.0;
    case RuleKind::log:
      require_log_interior(r);
      return std::log(r) - std::log1p(-r);
    case RuleKind::custom: return first_(r);
  }
  return 0.0;
}

double ScoringRule::g2(double r) const {
  switch (kind_) {
    case RuleKind::brier: return 2.0;
    case RuleKind::log:
      require_log_interior(r);
      return 1.0 / (r * (1.0 - r));
    case RuleKind::custom: return second_(r);
  }
  return 0.0;
}

double ScoringRule::clip_report(double r) const {
  if (kind_ == RuleKind::log) return std::clamp(r, kLogClip, 1.0 - kLogClip);
  return r;
}

double outcome_score(const ScoringRule& rule, double r, int y) {
  require_unit(r, "report");
  if (y != 0 && y != 1) throw std::domain_error("outcome must be 0 or 1");
  switch (rule.kind()) {
    case RuleKind::brier: return -(r - y) * (r - y);
    case RuleKind::log:
      if (y == 1) {
        if (r <= 0.0) throw std::domain_error("log score of r=0 with y=1 is -inf; clip first");
        return std::log(r);
      }
      if (r >= 1.0) throw std::domain_error("log score of r=1 with y=0 is -inf; clip first");
      return std::log1p(-r);
    case RuleKind::custom: return rule.generator(r) + rule.g1(r) * (y - r);
  }
  return 0.0;
}

double expected_score(const ScoringRule& rule, double r, double p) {
  require_unit(r, "report");
  require_unit(p, "probability");
  switch (rule.kind()) {
    case RuleKind::brier: return -(r - p) * (r - p) - p * (1.0 - p);
    case RuleKind::log:
      require_log_interior(r);
      return p * std::log(r) + (1.0 - p) * std::log1p(-r);
    case RuleKind::custom: return rule.generator(r) + rule.g1(r) * (p - r);
  }
  return 0.0;
}

PropernessReport properness_check(const ScoringRule& rule, const std::function<double(double)>& h,
                                  std::span<const double> p_grid, double resolution) {
  if (!(resolution > 0.0 && resolution <= 0.01))
    throw std::invalid_argument("resolution must lie in (0, 0.01]");
  const auto steps = static_cast<long>(std::llround(1.0 / resolution));
  const double tol = 1.5 / static_cast<double>(steps);

  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  std::vector<double> bonus(grid.size());
  for (long i = 0; i <= steps; ++i) {
    grid[i] = rule.clip_report(static_cast<double>(i) / static_cast<double>(steps));
    bonus[i] = h ? h(grid[i]) : 0.0;
  }

  PropernessReport out;
  for (double p : p_grid) {
    std::size_t best = 0;
    double best_val = expected_score(rule, grid[0], p) + bonus[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double v = expected_score(rule, grid[i], p) + bonus[i];
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    out.types.push_back(p);
    out.argmax.push_back(grid[best]);
    if (std::abs(grid[best] - p) > tol) out.strictly_proper = false;
  }
  return out;
}

BinnedForecastSet::BinnedForecastSet(std::vector<double> reports, std::vector<int> outcomes,
                                     BinningMode mode, int bins)
    : reports_(std::move(reports)), outcomes_(std::move(outcomes)), mode_(mode), bins_(bins) {
  if (reports_.empty()) throw std::invalid_argument("forecast set is empty");
  if (reports_.size() != outcomes_.size())
    throw std::invalid_argument("reports and outcomes differ in length");
  if (mode_ == BinningMode::fixed_width && bins_ < 1)
    throw std::invalid_argument("fixed-width binning needs at least one bin");
  for (double r : reports_) require_unit(r, "report");
  for (int y : outcomes_)
    if (y != 0 && y != 1) throw std::domain_error("outcome must be 0 or 1");
}

BrierDecomposition brier_decomposition(const BinnedForecastSet& data) {
  const auto& r = data.reports();
  const auto& y = data.outcomes();
  const double k = static_cast<double>(r.size());

  struct Bin {
    double n = 0, sum_r = 0, sum_y = 0;
  };
  std::map<double, Bin> bins;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double key = r[i];
    if (data.mode() == BinningMode::fixed_width) {
      const int b = std::min(data.bins() - 1, static_cast<int>(std::floor(r[i] * data.bins())));
      key = b;
    }
    Bin& bin = bins[key];
    bin.n += 1;
    bin.sum_r += r[i];
    bin.sum_y += y[i];
  }

  BrierDecomposition out;
  double sum_y = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    out.brier += (r[i] - y[i]) * (r[i] - y[i]);
    sum_y += y[i];
  }
  out.brier /= k;
  const double base = sum_y / k;
  out.uncertainty = base * (1.0 - base);

  for (const auto& [key, bin] : bins) {
    const double forecast = bin.sum_r / bin.n;
    const double freq = bin.sum_y / bin.n;
    out.reliability += bin.n * (forecast - freq) * (forecast - freq);
    out.resolution += bin.n * (freq - base) * (freq - base);
  }
  out.reliability /= k;
  out.resolution /= k;
  out.occupied_bins = bins.size();
  return out;
}

}  // namespace gatelab
