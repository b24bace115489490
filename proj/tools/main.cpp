// gatelab: sweep, analyse and probe confidence-gated selection.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>

#include "gatelab/best_response.hpp"
#include "gatelab/config.hpp"
#include "gatelab/csv_io.hpp"
#include "gatelab/harness.hpp"
#include "gatelab/optimizers.hpp"
#include "gatelab/principal.hpp"
#include "gatelab/scoring.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace gatelab;

namespace {

struct RunFlags {
  std::string config;
  std::string out;
  std::string mode;
  std::int64_t seed_offset = 0;
  int parallel = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON); built-in defaults when omitted")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--mode", f.mode, "payoff mode for selection")->check(CLI::IsMember({"oracle", "proxy", "expected"}));
  cmd->add_option("--seed-offset", f.seed_offset, "shift every experimental and held-out seed");
  cmd->add_option("--parallel", f.parallel, "worker threads for sweep cells (1 = serial)")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const RunFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.mode.empty()) cfg.mode = parse_payoff_mode(f.mode);
  if (f.seed_offset != 0) apply_seed_offset(cfg, f.seed_offset);
  if (f.parallel > 0) cfg.parallel = f.parallel;
  validate(cfg);
  return cfg;
}

Execution execution(const ExperimentConfig& cfg) {
  return cfg.parallel <= 1 ? Execution::serial() : Execution::parallel(cfg.parallel);
}

void write_json(const fs::path& path, const ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

ordered_json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) return nullptr;
  return ordered_json::parse(in);
}

// Writes records, tasks, binding flags and a manifest; returns the records.
ExperimentRun do_sweep(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  std::mutex log_mu;
  std::ofstream log;
  LogSink sink;
  if (cfg.endpoint) {
    log.open(dir / "llm_log.jsonl", std::ios::binary | std::ios::app);
    sink = [&](const std::string& line) {
      std::lock_guard lock(log_mu);
      log << line << '\n';
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto run = run_experiment(cfg, execution(cfg), sink);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_records_csv(dir / ("records_" + to_string(cfg.mode) + ".csv"), run.records);
  write_records_csv(dir / "records_random.csv", run.random_records);
  write_tasks_csv(dir / "tasks.csv", run.tasks);
  write_binding_csv(dir / "binding.csv", run.binding);
  ordered_json manifest;
  manifest["config_fingerprint"] = run.fingerprint;
  manifest["mode"] = to_string(cfg.mode);
  manifest["records"] = run.records.size();
  manifest["config"] = canonical_json(cfg);
  write_json(dir / "manifest.json", manifest);
  std::cerr << "sweep: " << run.records.size() << " records + " << run.random_records.size() << " random-control records in "
            << secs << " s -> " << dir.string() << '\n';
  return run;
}

int cmd_sweep(const RunFlags& f) {
  do_sweep(resolve(f));
  return 0;
}

int cmd_hypotheses(const RunFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const fs::path dir = cfg.output_dir;
  const std::string fp = fingerprint(cfg);
  const fs::path mode_csv = dir / ("records_" + to_string(cfg.mode) + ".csv");
  const fs::path random_csv = dir / "records_random.csv";

  std::vector<SweepRecord> records, random_records;
  if (fs::exists(mode_csv)) {
    const auto manifest = read_manifest(dir);
    if (manifest.is_object() && manifest.value("config_fingerprint", std::string{}) != fp)
      throw std::runtime_error("records in " + dir.string() + " were produced by config " +
                               manifest.value("config_fingerprint", std::string{"?"}) + ", not " + fp);
    records = read_records_csv(mode_csv);
    if (fs::exists(random_csv)) random_records = read_records_csv(random_csv);
    std::cerr << "hypotheses: analysing " << records.size() << " stored records from " << mode_csv.string() << '\n';
  } else {
    auto run = do_sweep(cfg);
    records = std::move(run.records);
    random_records = std::move(run.random_records);
  }

  const auto result = run_hypotheses(records, random_records, analysis_options(cfg));
  emit_results(result, dir / "hypothesis_results.json");
  write_surface_csv(dir / "surface.csv", records);
  write_geometry_csv(dir / "geometry_by_N.csv", result.geometry);

  for (const auto& h : result.hypotheses) {
    std::cout << to_string(h.id) << "  " << (h.pass ? "pass" : "fail");
    if (h.statistic) std::cout << "  stat=" << *h.statistic;
    std::cout << "  p=" << h.p_raw << "  p_holm=" << h.p_holm;
    if (h.error) std::cout << "  error: " << *h.error;
    std::cout << '\n';
  }
  return 0;
}

ScoringRule parse_rule(const std::string& name) {
  if (name == "brier") return ScoringRule::brier();
  if (name == "log") return ScoringRule::log();
  throw std::invalid_argument("unknown scoring rule: " + name);
}

std::vector<double> split_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);) out.push_back(std::stod(part));
  return out;
}

// step:T | sigmoid:T:TEMP | affine:A:B | piecewise:r0=q0,r1=q1,...
Gate parse_gate(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "piecewise") {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(rest);
    for (std::string kv; std::getline(ss, kv, ',');) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("piecewise knots are written r=q");
      knots.emplace_back(std::stod(kv.substr(0, eq)), std::stod(kv.substr(eq + 1)));
    }
    return Gate::piecewise(std::move(knots));
  }
  const auto v = split_numbers(rest, ':');
  if (kind == "step" && v.size() == 1) return Gate::step(v[0]);
  if (kind == "sigmoid" && v.size() == 2) return Gate::sigmoid(v[0], v[1]);
  if (kind == "affine" && v.size() == 2) return Gate::affine(v[0], v[1]);
  throw std::invalid_argument("cannot parse gate '" + text + "'");
}

struct BestResponseArgs {
  double p = 0.5, R = 1.0, w_C = 1.0, w_A = 0.05;
  std::string gate = "step:0.7", rule = "brier";
  double grid = 1e-4;
};

int cmd_best_response(const BestResponseArgs& a) {
  const Gate gate = parse_gate(a.gate);
  const BestResponseInput in{a.p, a.R, a.w_C, a.w_A, gate, parse_rule(a.rule)};
  const auto nb = numeric_best_report(in, a.grid);
  ordered_json doc;
  doc["gate"] = gate.describe();
  doc["rule"] = a.rule;
  doc["numeric_report"] = nb.report;
  doc["numeric_payoff"] = nb.payoff;
  doc["inflated"] = nb.inflated;
  doc["inflation"] = nb.report - a.p;
  if (std::holds_alternative<StepGate>(gate.kind())) {
    const double t = std::get<StepGate>(gate.kind()).threshold;
    doc["inflation_condition"] = a.p < t ? ordered_json(inflation_condition(a.p, t, a.w_C, a.w_A, a.R)) : ordered_json(nullptr);
  } else {
    try {
      doc["closed_form_report"] = closed_form_report(in);
    } catch (const std::exception& e) {
      doc["closed_form_report"] = nullptr;
      doc["closed_form_note"] = e.what();
    }
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

struct StackelbergArgs {
  double p_min = 0.5, R = 1.0, cost = 1.0, w_C = 1.0, w_A = 0.04;
  std::string rule = "brier";
  int nodes = 1001, affine_grid = 50, parallel = 1;
};

int cmd_stackelberg(const StackelbergArgs& a) {
  const PrincipalSpec spec{a.p_min, a.R, a.cost, a.w_C, a.w_A, parse_rule(a.rule)};
  validate(spec);
  const auto F = TypeDistribution::uniform_nodes(static_cast<std::size_t>(a.nodes));
  const auto opt = optimal_threshold(spec);
  ordered_json doc;
  doc["ratio"] = spec.ratio();
  doc["saturated"] = opt.saturated;
  doc["first_best_utility"] = first_best_utility(spec, F);
  if (opt.r0) {
    doc["r0"] = *opt.r0;
    doc["first_best_screening"] = first_best_check(spec, *opt.r0, F.support());
    doc["step_gate_utility"] = principal_utility(spec, Gate::step(*opt.r0), F, numeric_responder(spec));
  } else {
    doc["saturated_welfare_loss"] = saturated_welfare_loss(spec, F);
  }
  if (a.rule == "brier") {
    const auto best = best_affine_gate(spec, F, a.affine_grid,
                                       a.parallel <= 1 ? Execution::serial() : Execution::parallel(a.parallel));
    doc["best_affine"] = {{"intercept", best.intercept}, {"slope", best.slope}, {"utility", best.utility}};
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

struct OptimizerArgs {
  double p = 0.5, r_min = 0.7, sigma = 0.1, w_C = 1.0, w_A = 1.0, R = 1.0;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;
  bool ascent = false;
  int parallel = 1;
};

int cmd_optimizer_check(const OptimizerArgs& a) {
  const Gate gate = Gate::step(a.r_min);
  const auto rule = ScoringRule::brier();
  const PayoffFn V = [&](double r) { return a.w_C * expected_score(rule, r, a.p) + a.w_A * approve_prob(gate, r) * a.R; };
  const GaussianReportPolicy pol{a.p, a.sigma};
  const auto mc = mc_gradient_at(pol, V, a.samples, a.seed,
                                 a.parallel <= 1 ? Execution::serial() : Execution::parallel(a.parallel));
  const double exact = analytic_gradient_step_gate(a.p, a.sigma, a.r_min, a.w_C, a.w_A, a.R);
  ordered_json doc;
  doc["analytic_gradient"] = exact;
  doc["mc_gradient"] = mc.estimate;
  doc["mc_standard_error"] = mc.standard_error;
  doc["z"] = (mc.estimate - exact) / mc.standard_error;
  doc["clipping_negligible"] = clipping_negligible(pol);
  if (a.ascent) {
    const auto ga = ascend(V, GradientAscent{}, a.p, a.seed);
    const auto es = ascend(V, Evolutionary{}, a.p, a.seed);
    doc["gradient_ascent_final"] = ga.back();
    doc["evolutionary_final"] = es.back();
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_decompose(const std::string& path, int bins) {
  auto [r, y] = read_forecast_csv(path);
  const BinnedForecastSet data(std::move(r), std::move(y), bins > 0 ? BinningMode::fixed_width : BinningMode::exact_value,
                               bins > 0 ? bins : 10);
  const auto d = brier_decomposition(data);
  ordered_json doc;
  doc["n"] = data.size();
  doc["binning"] = bins > 0 ? "fixed-width" : "exact-value";
  doc["brier"] = d.brier;
  doc["reliability"] = d.reliability;
  doc["resolution"] = d.resolution;
  doc["uncertainty"] = d.uncertainty;
  doc["occupied_bins"] = d.occupied_bins;
  doc["identity_residual"] = d.brier - (d.reliability - d.resolution + d.uncertainty);
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gatelab: confidence-gated selection experiments"};
  app.require_subcommand(1);

  RunFlags sweep_flags, hyp_flags;
  auto* sweep = app.add_subcommand("sweep", "generate Best-of-N sweep records");
  add_run_flags(sweep, sweep_flags);
  auto* hyp = app.add_subcommand("hypotheses", "run the hypothesis battery (sweeping first if no records exist)");
  add_run_flags(hyp, hyp_flags);

  BestResponseArgs br;
  auto* best = app.add_subcommand("best-response", "agent's optimal report for one context");
  best->add_option("--p", br.p, "true success probability")->check(CLI::Range(0.0, 1.0));
  best->add_option("--R", br.R, "reward of the action");
  best->add_option("--wC", br.w_C, "calibration weight");
  best->add_option("--wA", br.w_A, "autonomy weight");
  best->add_option("--gate", br.gate, "step:T | sigmoid:T:TEMP | affine:A:B | piecewise:r=q,...");
  best->add_option("--rule", br.rule, "brier | log");
  best->add_option("--grid", br.grid, "report grid step");

  StackelbergArgs st;
  auto* stack = app.add_subcommand("stackelberg", "principal's optimal threshold and screening checks");
  stack->add_option("--p-min", st.p_min, "profitability cutoff");
  stack->add_option("--R", st.R, "benefit of approving a profitable type");
  stack->add_option("--cost", st.cost, "cost of approving an unprofitable type");
  stack->add_option("--wC", st.w_C, "calibration weight");
  stack->add_option("--wA", st.w_A, "autonomy weight");
  stack->add_option("--rule", st.rule, "brier | log");
  stack->add_option("--nodes", st.nodes, "uniform type-grid nodes");
  stack->add_option("--affine-grid", st.affine_grid, "grid points per affine parameter");
  stack->add_option("--parallel", st.parallel, "threads for the affine search");

  OptimizerArgs oa;
  auto* opt = app.add_subcommand("optimizer-check", "policy-gradient sign at the calibrated point");
  opt->add_option("--p", oa.p, "true success probability");
  opt->add_option("--r-min", oa.r_min, "step-gate threshold");
  opt->add_option("--sigma", oa.sigma, "Gaussian policy spread");
  opt->add_option("--wC", oa.w_C, "calibration weight");
  opt->add_option("--wA", oa.w_A, "autonomy weight");
  opt->add_option("--R", oa.R, "reward");
  opt->add_option("--samples", oa.samples, "Monte Carlo samples");
  opt->add_option("--seed", oa.seed, "random seed");
  opt->add_flag("--ascent", oa.ascent, "also run gradient and evolutionary ascent from the truthful report");
  opt->add_option("--parallel", oa.parallel, "threads for the Monte Carlo estimate");

  std::string forecast_csv;
  int bins = 0;
  auto* dec = app.add_subcommand("decompose", "Brier reliability/resolution/uncertainty of a forecast CSV");
  dec->add_option("csv", forecast_csv, "CSV with r,y or r_sel,y_sel columns")->required()->check(CLI::ExistingFile);
  dec->add_option("--bins", bins, "fixed-width bins (0 = one bin per distinct report)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*hyp) return cmd_hypotheses(hyp_flags);
    if (*best) return cmd_best_response(br);
    if (*stack) return cmd_stackelberg(st);
    if (*opt) return cmd_optimizer_check(oa);
    if (*dec) return cmd_decompose(forecast_csv, bins);
  } catch (const std::exception& e) {
    std::cerr << "gatelab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
