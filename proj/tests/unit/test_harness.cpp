#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gatelab/answers.hpp"
#include "gatelab/config.hpp"
#include "gatelab/csv_io.hpp"
#include "gatelab/harness.hpp"
#include "gatelab/hypotheses.hpp"

using namespace gatelab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gatelab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const ExperimentRun& default_run() {
  static const ExperimentRun run = run_experiment(ExperimentConfig{});
  return run;
}

}  // namespace

TEST_CASE("checked-in config is the canonical text of the defaults") {
  const fs::path path = fs::path(GATELAB_SOURCE_DIR) / "configs" / "default.json";
  const auto text = slurp(path);
  CHECK(text == canonical_text(ExperimentConfig{}));
  CHECK(canonical_text(load_config(path)) == text);
  CHECK(fingerprint(load_config(path)) == fingerprint(ExperimentConfig{}));
}

TEST_CASE("config round trip and validation") {
  ExperimentConfig cfg;
  cfg.grid.N = {1, 4};
  cfg.agent.coupling = 0.25;
  cfg.mode = PayoffMode::proxy;
  const auto back = config_from_json(nlohmann::json::parse(config_to_json(cfg).dump()));
  CHECK(canonical_text(back) == canonical_text(cfg));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seedz": [1]})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"grid": {"N": [1], "q": 2}})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seeds": [0, 1000]})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"grid": {"N": []}})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"tasks": {"source": "file", "path": "t.json"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"w_C": "one"})")), std::invalid_argument);
}

TEST_CASE("fingerprint tracks the experiment definition only") {
  ExperimentConfig a;
  const auto base = fingerprint(a);
  CHECK(base.size() == 16);
  a.output_dir = "elsewhere";
  a.parallel = 4;
  CHECK(fingerprint(a) == base);
  ExperimentConfig b;
  b.grid.r_min = {0.5, 0.7};
  CHECK(fingerprint(b) != base);
  ExperimentConfig c;
  c.grid.N.push_back(64);
  CHECK(fingerprint(c) != base);
  ExperimentConfig d;
  apply_seed_offset(d, 5);
  CHECK(fingerprint(d) != base);
  CHECK(d.seeds.front() == 5);
  CHECK(d.heldout_seeds.front() == 1005);
  ExperimentConfig e;
  CHECK_THROWS(apply_seed_offset(e, -1));
}

TEST_CASE("battery structure") {
  const auto& run = default_run();
  AnalysisOptions opts;
  opts.fingerprint = run.fingerprint;
  const auto res = run_hypotheses(run.records, run.random_records, opts);
  REQUIRE(res.hypotheses.size() == 5);
  const auto doc = results_document(res);
  CHECK(doc["config_fingerprint"] == run.fingerprint);
  CHECK(doc["conventions"]["holm_family"].size() == 5);
  for (const auto& h : doc["hypotheses"]) {
    CHECK((h["decision"] == "pass" || h["decision"] == "fail"));
    CHECK(h["p_holm"].get<double>() >= h["p"].get<double>());
  }
  // Holm over exactly the five raw p-values
  std::vector<double> raw;
  for (const auto& h : res.hypotheses) raw.push_back(h.p_raw);
  const auto holm = holm_correct(raw);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(res.hypotheses[i].p_holm == holm.adjusted[i]);
    CHECK(res.hypotheses[i].pass == (!res.hypotheses[i].falsified && res.hypotheses[i].p_holm < 0.05));
  }
  CHECK(res.random_control);
  CHECK(res.geometry.rows.front().N == 1);
  CHECK(res.geometry.rows.front().violations == 0);
}

TEST_CASE("missing slices are reported, the rest still runs") {
  ExperimentConfig cfg;
  cfg.grid.ratio = {0.0};
  const auto run = run_experiment(cfg);
  const auto res = run_hypotheses(run.records, run.random_records, analysis_options(cfg));
  for (const auto& h : res.hypotheses) {
    if (h.id == HypothesisId::H6) {
      CHECK_FALSE(h.error);
      CHECK(h.statistic);
    } else {
      REQUIRE(h.error);
      CHECK(h.error->find("missing slice") != std::string::npos);
      CHECK_FALSE(h.pass);
      CHECK(h.p_raw == 1.0);
    }
  }
}

TEST_CASE("single-completion grid has no geometry violations") {
  ExperimentConfig cfg;
  cfg.grid.N = {1};
  const auto run = run_experiment(cfg);
  const auto g = surface_geometry(run.records, 0.05);
  REQUIRE(g.rows.size() == 1);
  CHECK(g.rows[0].rate == 0.0);
  CHECK(g.rows[0].triples > 0);
}

TEST_CASE("results are byte-identical across runs and re-analysis of stored records") {
  const auto dir = scratch("reanalysis");
  const ExperimentConfig cfg;
  const auto& run = default_run();
  const auto opts = analysis_options(cfg);
  emit_results(run_hypotheses(run.records, run.random_records, opts), dir / "a.json");

  const auto again = run_experiment(cfg);
  emit_results(run_hypotheses(again.records, again.random_records, opts), dir / "b.json");
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  write_records_csv(dir / "records.csv", run.records);
  write_records_csv(dir / "random.csv", run.random_records);
  const auto stored = read_records_csv(dir / "records.csv");
  const auto stored_random = read_records_csv(dir / "random.csv");
  emit_results(run_hypotheses(stored, stored_random, opts), dir / "c.json");
  CHECK(slurp(dir / "a.json") == slurp(dir / "c.json"));

  const auto parallel = run_experiment(cfg, Execution::parallel(3));
  emit_results(run_hypotheses(parallel.records, parallel.random_records, opts), dir / "d.json");
  CHECK(slurp(dir / "a.json") == slurp(dir / "d.json"));
}

TEST_CASE("record CSV schema") {
  const auto dir = scratch("csv");
  const auto& run = default_run();
  const std::vector<SweepRecord> few(run.records.begin(), run.records.begin() + 3);
  write_records_csv(dir / "r.csv", few);
  const auto text = slurp(dir / "r.csv");
  CHECK(text.substr(0, text.find('\n')) == kRecordHeader);
  const auto back = read_records_csv(dir / "r.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[2].r_sel == few[2].r_sel);
  CHECK(back[2].p_true == few[2].p_true);
  CHECK(back[2].category == few[2].category);

  std::ofstream(dir / "bad.csv") << "config_id,seed\n1,2\n";
  CHECK_THROWS(read_records_csv(dir / "bad.csv"));
  CHECK_THROWS(emit_results(BatteryResult{}, fs::path("/proc/definitely/not/here.json")));
}

TEST_CASE("forecast CSV for decomposition") {
  const auto dir = scratch("forecast");
  std::ofstream(dir / "f.csv") << "r,y\n0.8,1\n0.8,0\n0.2,0\n";
  const auto [r, y] = read_forecast_csv(dir / "f.csv");
  CHECK(r == std::vector<double>{0.8, 0.8, 0.2});
  CHECK(y == std::vector<int>{1, 0, 0});
}

TEST_CASE("answer verification") {
  Task arith{0, TaskCategory::arithmetic, 0.0, "2+2", ""};
  CHECK(verify_answer(arith, "4") == 1);
  CHECK(verify_answer(arith, "The answer is 5") == 0);
  CHECK(verify_answer(arith, "no idea") == 0);
  Task frac{1, TaskCategory::arithmetic, 0.0, "What is 7 / 2?", "7/2"};
  CHECK(verify_answer(frac, "3.5") == 1);
  CHECK(verify_answer(frac, "It is 7/2.") == 1);
  Task big{2, TaskCategory::arithmetic, 0.0, "", "1200 + 34"};
  CHECK(verify_answer(big, "1,234") == 1);
  CHECK(verify_answer(Task{3, TaskCategory::arithmetic, 0.0, "", "3 - 10"}, "-7") == 1);
  Task fact{4, TaskCategory::factual, 0.0, "Capital of France?", "Paris"};
  CHECK(verify_answer(fact, "paris.") == 1);
  CHECK(verify_answer(fact, "Lyon") == 0);
  Task alt{5, TaskCategory::factual, 0.0, "", "New York City|NYC"};
  CHECK(verify_answer(alt, "nyc") == 1);
  CHECK_THROWS_AS(verify_answer(Task{6, TaskCategory::code, 0.0, "", ""}, "print(1)"), UnsupportedCategory);
  CHECK(evaluate_expression("(1 + 2) * 3 / 4") == Rational(9, 4));
  CHECK_THROWS(evaluate_expression("1 / 0"));
  CHECK_THROWS(evaluate_expression("2 +"));
}

TEST_CASE("task files") {
  const auto dir = scratch("tasks");
  std::ofstream(dir / "ok.json")
      << R"([{"id": 1, "category": "arithmetic", "question": "2+3", "reference": "5"},
             {"id": 2, "category": "factual", "question": "Capital of Peru?", "reference": "Lima"}])";
  const auto tasks = read_task_file(dir / "ok.json");
  REQUIRE(tasks.size() == 2);
  CHECK(std::isnan(tasks[0].p_true));
  CHECK(tasks[1].reference == "Lima");
  std::ofstream(dir / "code.json") << R"([{"id": 1, "category": "code", "question": "write fizzbuzz"}])";
  CHECK_THROWS_AS(read_task_file(dir / "code.json"), std::invalid_argument);
  std::ofstream(dir / "dup.json") << R"([{"id": 1, "category": "factual", "question": "a"},
                                          {"id": 1, "category": "factual", "question": "b"}])";
  CHECK_THROWS_AS(read_task_file(dir / "dup.json"), std::invalid_argument);
}
