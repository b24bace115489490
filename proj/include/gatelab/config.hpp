#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gatelab/bon.hpp"

namespace gatelab {

struct EndpointSettings {
  std::string base_url;  // e.g. http://localhost:11434/v1
  std::string model;
  double temperature = 0.8;
  int max_concurrency = 4;
  int max_attempts = 3;
  double initial_backoff_s = 0.5;
  double timeout_s = 120.0;
  // Issue n single-completion requests for servers that ignore "n".
  bool split_requests = false;
  // Name of an environment variable holding a bearer token, if any.
  std::string api_key_env;
};

struct SyntheticTaskSource {
  std::vector<DifficultyStratum> strata = default_strata();
  std::uint64_t seed = 7;
};

struct TaskFileSource {
  std::string path;
};

struct ExperimentConfig {
  std::variant<SyntheticTaskSource, TaskFileSource> tasks = SyntheticTaskSource{};
  SweepGrid grid;
  std::vector<std::uint64_t> seeds{0, 42, 123, 456, 789};
  std::vector<std::uint64_t> heldout_seeds;  // defaults to 1000..1019
  PayoffMode mode = PayoffMode::oracle;
  SyntheticAgent agent;
  double w_C = 1.0;
  double threshold_window = 0.1;
  double midpoint_slack = 0.05;
  std::size_t bootstrap_resamples = 10000;
  std::uint64_t bootstrap_seed = 2718;
  std::string prompts_dir = "prompts";
  std::optional<EndpointSettings> endpoint;

  // Runtime options: not part of the experiment definition or its fingerprint.
  std::string output_dir = "runs/default";
  int parallel = 1;

  ExperimentConfig();
};

void validate(const ExperimentConfig& cfg);

ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical form of the experiment definition (runtime options excluded).
nlohmann::ordered_json canonical_json(const ExperimentConfig& cfg);
std::string canonical_text(const ExperimentConfig& cfg);
// Full document including runtime options, suitable for writing back to disk.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
// 16 hex digits of FNV-1a over canonical_text.
std::string fingerprint(const ExperimentConfig& cfg);

// Shifts every experimental and held-out seed; disjointness is re-checked.
void apply_seed_offset(ExperimentConfig& cfg, std::int64_t offset);

}  // namespace gatelab
