#include "gatelab/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gatelab {

using nlohmann::json;
using nlohmann::ordered_json;

ExperimentConfig::ExperimentConfig() {
  for (std::uint64_t s = 1000; s < 1020; ++s) heldout_seeds.push_back(s);
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.grid);
  validate(cfg.agent);
  if (cfg.seeds.empty()) throw std::invalid_argument("config: at least one experimental seed is required");
  if (cfg.heldout_seeds.empty()) throw std::invalid_argument("config: at least one held-out seed is required");
  std::set<std::uint64_t> exp(cfg.seeds.begin(), cfg.seeds.end());
  if (exp.size() != cfg.seeds.size()) throw std::invalid_argument("config: experimental seeds must be distinct");
  std::set<std::uint64_t> held(cfg.heldout_seeds.begin(), cfg.heldout_seeds.end());
  if (held.size() != cfg.heldout_seeds.size()) throw std::invalid_argument("config: held-out seeds must be distinct");
  for (auto s : held)
    if (exp.count(s))
      throw SeedOverlapError("config: held-out seed " + std::to_string(s) + " is also an experimental seed");
  if (!(cfg.w_C > 0)) throw std::invalid_argument("config: w_C must be positive");
  if (!(cfg.threshold_window > 0)) throw std::invalid_argument("config: threshold_window must be positive");
  if (!(cfg.midpoint_slack >= 0)) throw std::invalid_argument("config: midpoint_slack must be non-negative");
  if (cfg.bootstrap_resamples < 2) throw std::invalid_argument("config: bootstrap_resamples must be at least 2");
  if (cfg.parallel < 1) throw std::invalid_argument("config: parallel must be at least 1");
  if (const auto* f = std::get_if<TaskFileSource>(&cfg.tasks); f && f->path.empty())
    throw std::invalid_argument("config: task file path is empty");
  if (std::holds_alternative<TaskFileSource>(cfg.tasks) && !cfg.endpoint)
    throw std::invalid_argument("config: a task file needs an endpoint (LLM mode)");
  if (cfg.endpoint) {
    const auto& e = *cfg.endpoint;
    if (e.base_url.empty() || e.model.empty()) throw std::invalid_argument("config: endpoint needs base_url and model");
    if (e.max_concurrency < 1 || e.max_attempts < 1)
      throw std::invalid_argument("config: endpoint concurrency and attempts must be positive");
    if (!(e.temperature >= 0)) throw std::invalid_argument("config: endpoint temperature must be non-negative");
  }
}

namespace {

template <class T>
void read_opt(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

void reject_unknown(const json& doc, std::initializer_list<const char*> known, const std::string& where) {
  if (!doc.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [k, v] : doc.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"tasks", "grid", "seeds", "heldout_seeds", "mode", "agent", "w_C", "threshold_window",
                  "midpoint_slack", "bootstrap_resamples", "bootstrap_seed", "prompts_dir", "endpoint", "output_dir",
                  "parallel"},
                 "top level");
  ExperimentConfig cfg;
  try {
    if (doc.contains("tasks")) {
      const auto& t = doc.at("tasks");
      reject_unknown(t, {"source", "seed", "strata", "path"}, "tasks");
      const auto source = t.value("source", std::string("synthetic"));
      if (source == "synthetic") {
        SyntheticTaskSource s;
        read_opt(t, "seed", s.seed);
        if (t.contains("strata")) {
          s.strata.clear();
          for (const auto& st : t.at("strata")) {
            reject_unknown(st, {"count", "lo", "hi"}, "tasks.strata");
            s.strata.push_back({st.at("count").get<std::size_t>(), st.at("lo").get<double>(), st.at("hi").get<double>()});
          }
        }
        cfg.tasks = s;
      } else if (source == "file") {
        cfg.tasks = TaskFileSource{t.at("path").get<std::string>()};
      } else {
        throw std::invalid_argument("config: tasks.source must be 'synthetic' or 'file'");
      }
    }
    if (doc.contains("grid")) {
      const auto& g = doc.at("grid");
      reject_unknown(g, {"N", "ratio", "r_min"}, "grid");
      read_opt(g, "N", cfg.grid.N);
      read_opt(g, "ratio", cfg.grid.ratio);
      read_opt(g, "r_min", cfg.grid.r_min);
    }
    read_opt(doc, "seeds", cfg.seeds);
    read_opt(doc, "heldout_seeds", cfg.heldout_seeds);
    if (doc.contains("mode")) cfg.mode = parse_payoff_mode(doc.at("mode").get<std::string>());
    if (doc.contains("agent")) {
      const auto& a = doc.at("agent");
      reject_unknown(a, {"kappa", "coupling", "clip_lo", "clip_hi"}, "agent");
      read_opt(a, "kappa", cfg.agent.kappa);
      read_opt(a, "coupling", cfg.agent.coupling);
      read_opt(a, "clip_lo", cfg.agent.clip_lo);
      read_opt(a, "clip_hi", cfg.agent.clip_hi);
    }
    read_opt(doc, "w_C", cfg.w_C);
    read_opt(doc, "threshold_window", cfg.threshold_window);
    read_opt(doc, "midpoint_slack", cfg.midpoint_slack);
    read_opt(doc, "bootstrap_resamples", cfg.bootstrap_resamples);
    read_opt(doc, "bootstrap_seed", cfg.bootstrap_seed);
    read_opt(doc, "prompts_dir", cfg.prompts_dir);
    if (doc.contains("endpoint") && !doc.at("endpoint").is_null()) {
      const auto& e = doc.at("endpoint");
      reject_unknown(e,
                     {"base_url", "model", "temperature", "max_concurrency", "max_attempts", "initial_backoff_s",
                      "timeout_s", "split_requests", "api_key_env"},
                     "endpoint");
      EndpointSettings s;
      s.base_url = e.at("base_url").get<std::string>();
      s.model = e.at("model").get<std::string>();
      read_opt(e, "temperature", s.temperature);
      read_opt(e, "max_concurrency", s.max_concurrency);
      read_opt(e, "max_attempts", s.max_attempts);
      read_opt(e, "initial_backoff_s", s.initial_backoff_s);
      read_opt(e, "timeout_s", s.timeout_s);
      read_opt(e, "split_requests", s.split_requests);
      read_opt(e, "api_key_env", s.api_key_env);
      cfg.endpoint = s;
    }
    read_opt(doc, "output_dir", cfg.output_dir);
    read_opt(doc, "parallel", cfg.parallel);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

ordered_json canonical_json(const ExperimentConfig& cfg) {
  ordered_json doc;
  if (const auto* s = std::get_if<SyntheticTaskSource>(&cfg.tasks)) {
    ordered_json strata = ordered_json::array();
    for (const auto& st : s->strata) strata.push_back({{"count", st.count}, {"lo", st.lo}, {"hi", st.hi}});
    doc["tasks"] = {{"source", "synthetic"}, {"seed", s->seed}, {"strata", strata}};
  } else {
    doc["tasks"] = {{"source", "file"}, {"path", std::get<TaskFileSource>(cfg.tasks).path}};
  }
  doc["grid"] = {{"N", cfg.grid.N}, {"ratio", cfg.grid.ratio}, {"r_min", cfg.grid.r_min}};
  doc["seeds"] = cfg.seeds;
  doc["heldout_seeds"] = cfg.heldout_seeds;
  doc["mode"] = to_string(cfg.mode);
  doc["agent"] = {{"kappa", cfg.agent.kappa},
                  {"coupling", cfg.agent.coupling},
                  {"clip_lo", cfg.agent.clip_lo},
                  {"clip_hi", cfg.agent.clip_hi}};
  doc["w_C"] = cfg.w_C;
  doc["threshold_window"] = cfg.threshold_window;
  doc["midpoint_slack"] = cfg.midpoint_slack;
  doc["bootstrap_resamples"] = cfg.bootstrap_resamples;
  doc["bootstrap_seed"] = cfg.bootstrap_seed;
  doc["prompts_dir"] = cfg.prompts_dir;
  if (cfg.endpoint) {
    const auto& e = *cfg.endpoint;
    doc["endpoint"] = {{"base_url", e.base_url},
                       {"model", e.model},
                       {"temperature", e.temperature},
                       {"max_concurrency", e.max_concurrency},
                       {"max_attempts", e.max_attempts},
                       {"initial_backoff_s", e.initial_backoff_s},
                       {"timeout_s", e.timeout_s},
                       {"split_requests", e.split_requests},
                       {"api_key_env", e.api_key_env}};
  } else {
    doc["endpoint"] = nullptr;
  }
  return doc;
}

std::string canonical_text(const ExperimentConfig& cfg) { return canonical_json(cfg).dump(2) + "\n"; }

ordered_json config_to_json(const ExperimentConfig& cfg) {
  auto doc = canonical_json(cfg);
  doc["output_dir"] = cfg.output_dir;
  doc["parallel"] = cfg.parallel;
  return doc;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text(cfg))));
  return buf;
}

void apply_seed_offset(ExperimentConfig& cfg, std::int64_t offset) {
  auto shift = [offset](std::vector<std::uint64_t>& seeds) {
    for (auto& s : seeds) {
      const auto shifted = static_cast<std::int64_t>(s) + offset;
      if (shifted < 0) throw std::invalid_argument("seed offset makes a seed negative");
      s = static_cast<std::uint64_t>(shifted);
    }
  };
  shift(cfg.seeds);
  shift(cfg.heldout_seeds);
  validate(cfg);
}

}  // namespace gatelab
