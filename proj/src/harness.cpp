#include "gatelab/harness.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace gatelab {

std::vector<Task> read_task_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read task file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw std::invalid_argument(path.string() + ": expected a non-empty JSON array");
  std::vector<Task> tasks;
  std::set<int> ids;
  for (const auto& e : doc) {
    Task t;
    try {
      t.id = e.at("id").get<int>();
      t.category = parse_category(e.at("category").get<std::string>());
      t.question = e.at("question").get<std::string>();
      t.reference = e.value("reference", std::string{});
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument(path.string() + ": " + ex.what());
    }
    if (t.category == TaskCategory::code)
      throw std::invalid_argument(path.string() + ": code tasks are not supported in endpoint mode (task " +
                                  std::to_string(t.id) + ")");
    if (!ids.insert(t.id).second) throw std::invalid_argument(path.string() + ": duplicate task id " + std::to_string(t.id));
    t.p_true = std::numeric_limits<double>::quiet_NaN();
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<Task> load_tasks(const ExperimentConfig& cfg) {
  if (const auto* s = std::get_if<SyntheticTaskSource>(&cfg.tasks)) return make_synthetic_tasks(s->strata, s->seed);
  return read_task_file(std::get<TaskFileSource>(cfg.tasks).path);
}

CachedSource::CachedSource(std::unique_ptr<CompletionSource> inner) : inner_(std::move(inner)) {}

std::vector<Completion> CachedSource::draw(const Task& task, std::uint64_t seed, std::size_t n) const {
  const auto key = std::pair{task.id, seed};
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.size() >= n) return {it->second.begin(), it->second.begin() + n};
  }
  auto fresh = inner_->draw(task, seed, n);
  std::lock_guard lock(mu_);
  auto& slot = cache_[key];
  if (fresh.size() > slot.size()) slot = fresh;
  return fresh;
}

std::unique_ptr<CompletionSource> make_source(const ExperimentConfig& cfg, LogSink log) {
  if (cfg.endpoint)
    return std::make_unique<CachedSource>(std::make_unique<LlmCompletionSource>(*cfg.endpoint, cfg.prompts_dir, std::move(log)));
  return std::make_unique<SyntheticSource>(cfg.agent);
}

ExperimentRun run_experiment(const ExperimentConfig& cfg, Execution exec, LogSink log) {
  validate(cfg);
  ExperimentRun run;
  run.fingerprint = fingerprint(cfg);
  run.tasks = load_tasks(cfg);
  const auto source = make_source(cfg, std::move(log));
  run.binding = estimate_binding_set(*source, run.tasks, cfg.grid.r_min, cfg.seeds, cfg.heldout_seeds);

  SweepSpec spec{run.tasks, cfg.grid, cfg.seeds, cfg.mode, Selector::argmax, cfg.w_C, run.binding};
  run.records = run_sweep(spec, *source, exec);
  spec.selector = Selector::uniform_random;
  run.random_records = run_sweep(spec, *source, exec);
  return run;
}

AnalysisOptions analysis_options(const ExperimentConfig& cfg) {
  AnalysisOptions o;
  o.fingerprint = fingerprint(cfg);
  o.threshold_window = cfg.threshold_window;
  o.midpoint_slack = cfg.midpoint_slack;
  o.bootstrap_resamples = cfg.bootstrap_resamples;
  o.bootstrap_seed = cfg.bootstrap_seed;
  return o;
}

BatteryResult run_hypotheses(const ExperimentConfig& cfg, Execution exec) {
  const auto run = run_experiment(cfg, exec);
  return run_hypotheses(run.records, run.random_records, analysis_options(cfg));
}

}  // namespace gatelab
