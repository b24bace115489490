#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "gatelab/bon.hpp"
#include "gatelab/config.hpp"
#include "gatelab/execution.hpp"
#include "gatelab/hypotheses.hpp"
#include "gatelab/llm.hpp"

namespace gatelab {

// JSON array of {"id", "category", "question", "reference"} objects.
std::vector<Task> read_task_file(const std::filesystem::path& path);

std::vector<Task> load_tasks(const ExperimentConfig& cfg);

// Remembers the longest draw per (task, seed) and serves shorter requests as
// prefixes, so repeated passes over an endpoint cost one call per stream.
class CachedSource : public CompletionSource {
 public:
  explicit CachedSource(std::unique_ptr<CompletionSource> inner);
  std::vector<Completion> draw(const Task& task, std::uint64_t seed, std::size_t n) const override;

 private:
  std::unique_ptr<CompletionSource> inner_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, std::uint64_t>, std::vector<Completion>> cache_;
};

// Synthetic agent unless the config names an endpoint.
std::unique_ptr<CompletionSource> make_source(const ExperimentConfig& cfg, LogSink log = {});

struct ExperimentRun {
  std::string fingerprint;
  std::vector<Task> tasks;
  BindingEstimate binding;
  std::vector<SweepRecord> records;         // argmax selection under cfg.mode
  std::vector<SweepRecord> random_records;  // uniform random selection control
};

ExperimentRun run_experiment(const ExperimentConfig& cfg, Execution exec = Execution::serial(), LogSink log = {});

AnalysisOptions analysis_options(const ExperimentConfig& cfg);

// Generates records on demand, then runs the battery.
BatteryResult run_hypotheses(const ExperimentConfig& cfg, Execution exec = Execution::serial());

}  // namespace gatelab
