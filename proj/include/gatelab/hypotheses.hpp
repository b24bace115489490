#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gatelab/bon.hpp"
#include "gatelab/stats.hpp"

namespace gatelab {

enum class HypothesisId { H1, H2, H4, H5, H6 };
enum class TestKind { paired_t, jonckheere_terpstra, two_proportion_z, welch_t };

std::string to_string(HypothesisId id);
std::string to_string(TestKind k);

struct HypothesisSpec {
  HypothesisId id;
  std::string name;
  std::string slice;
  TestKind test;
  Alternative direction;
  std::string falsified_when;
};

// The five-member family, in reporting order.
const std::vector<HypothesisSpec>& hypothesis_family();

struct HypothesisResult {
  HypothesisId id;
  std::optional<double> statistic;
  double p_raw = 1.0;
  double p_holm = 1.0;
  std::optional<double> effect_size;
  std::string effect_kind;
  bool falsified = true;
  bool pass = false;
  std::optional<std::string> error;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct GeometryRow {
  int N;
  std::size_t violations = 0;
  std::size_t triples = 0;
  double rate = 0.0;
  Interval ci{0.0, 1.0};
};

struct GeometryResult {
  std::vector<GeometryRow> rows;
  std::optional<double> spearman;  // Spearman(N, rate); empty when degenerate
  std::size_t pooled_violations = 0;
  std::size_t pooled_triples = 0;
  std::optional<Interval> pooled_ci;
};

struct RandomControl {
  std::vector<std::pair<double, double>> delta_bind;  // (ratio, mean Delta on binding records)
  double max_abs = 0.0;
};

struct AnalysisOptions {
  std::string fingerprint;
  double threshold_window = 0.1;
  double midpoint_slack = 0.05;
  int focus_N = 32;
  int base_N = 1;
  double focus_r_min = 0.7;
  double gated_ratio = 4.0;
  std::vector<double> trend_ratios{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> plateau_ratios{1.0, 2.0, 4.0};
  std::size_t bootstrap_resamples = 10000;
  std::uint64_t bootstrap_seed = 2718;
};

struct BatteryResult {
  std::string fingerprint;
  std::string mode;
  std::vector<HypothesisResult> hypotheses;
  GeometryResult geometry;
  std::optional<RandomControl> random_control;
  std::optional<double> plateau_spread;
};

GeometryResult surface_geometry(std::span<const SweepRecord> records, double slack);

// Pure function of the record sets. random_records may be empty.
BatteryResult run_hypotheses(std::span<const SweepRecord> records, std::span<const SweepRecord> random_records,
                             const AnalysisOptions& opts);

nlohmann::ordered_json results_document(const BatteryResult& result);
void emit_results(const BatteryResult& result, const std::filesystem::path& path);

// Plot-ready tables.
void write_surface_csv(const std::filesystem::path& path, std::span<const SweepRecord> records);
void write_geometry_csv(const std::filesystem::path& path, const GeometryResult& g);

}  // namespace gatelab
