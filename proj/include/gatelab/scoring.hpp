#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gatelab {

enum class RuleKind { brier, log, custom };

// A strictly proper scoring rule in Savage form: S(r, y) = G(r) + G'(r)(y - r)
// for a strictly convex generator G.
class ScoringRule {
 public:
  using Fn = std::function<double(double)>;

  static ScoringRule brier();
  static ScoringRule log();
  static ScoringRule custom(std::string name, Fn generator, Fn first, Fn second);

  RuleKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double generator(double r) const;
  double g1(double r) const;
  double g2(double r) const;

  // Maps a report onto the rule's evaluable domain (identity except for Log).
  double clip_report(double r) const;

 private:
  ScoringRule(RuleKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  RuleKind kind_;
  std::string name_;
  Fn generator_, first_, second_;
};

inline constexpr double kLogClip = 1e-9;

double outcome_score(const ScoringRule& rule, double r, int y);
double expected_score(const ScoringRule& rule, double r, double p);

struct PropernessReport {
  std::vector<double> types;
  std::vector<double> argmax;
  bool strictly_proper = true;
};

// Argmax of expected_score + h over a report grid of the given resolution,
// for every type in p_grid. Ties go to the lowest report.
PropernessReport properness_check(const ScoringRule& rule, const std::function<double(double)>& h,
                                  std::span<const double> p_grid, double resolution = 1e-4);

enum class BinningMode { exact_value, fixed_width };

class BinnedForecastSet {
 public:
  BinnedForecastSet(std::vector<double> reports, std::vector<int> outcomes,
                    BinningMode mode = BinningMode::exact_value, int bins = 10);

  const std::vector<double>& reports() const { return reports_; }
  const std::vector<int>& outcomes() const { return outcomes_; }
  BinningMode mode() const { return mode_; }
  int bins() const { return bins_; }
  std::size_t size() const { return reports_.size(); }

 private:
  std::vector<double> reports_;
  std::vector<int> outcomes_;
  BinningMode mode_;
  int bins_;
};

struct BrierDecomposition {
  double brier = 0.0;
  double reliability = 0.0;
  double resolution = 0.0;
  double uncertainty = 0.0;
  std::size_t occupied_bins = 0;
};

BrierDecomposition brier_decomposition(const BinnedForecastSet& data);

}  // namespace gatelab
