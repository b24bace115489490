#include "gatelab/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "gatelab/csv_io.hpp"

namespace gatelab {

using nlohmann::ordered_json;

std::string to_string(HypothesisId id) {
  switch (id) {
    case HypothesisId::H1: return "H1";
    case HypothesisId::H2: return "H2";
    case HypothesisId::H4: return "H4";
    case HypothesisId::H5: return "H5";
    case HypothesisId::H6: return "H6";
  }
  return "?";
}

std::string to_string(TestKind k) {
  switch (k) {
    case TestKind::paired_t: return "paired_t";
    case TestKind::jonckheere_terpstra: return "jonckheere_terpstra";
    case TestKind::two_proportion_z: return "two_proportion_z";
    case TestKind::welch_t: return "welch_t";
  }
  return "?";
}

const std::vector<HypothesisSpec>& hypothesis_family() {
  static const std::vector<HypothesisSpec> family{
      {HypothesisId::H1, "fixed-axis gating degradation", "N=32; ratio 4 vs ratio 0; per-task Brier pooled over seeds and r_min",
       TestKind::paired_t, Alternative::greater, "mean delta BS <= 0"},
      {HypothesisId::H2, "monotone inflation trend", "N=32; r_min=0.7; binding records; ratios 0.25,0.5,1,2,4",
       TestKind::jonckheere_terpstra, Alternative::greater, "JT z <= 0"},
      {HypothesisId::H4, "threshold clustering", "N=32; binding records; ratio>0 pooled vs ratio 0; each r_min",
       TestKind::two_proportion_z, Alternative::greater, "z <= 0 at any r_min"},
      {HypothesisId::H5, "binding-state specificity", "N=32; ratio>0; all r_min; binding vs non-binding records",
       TestKind::welch_t, Alternative::greater, "mean delta on binding <= mean delta on non-binding"},
      {HypothesisId::H6, "selection control without gating", "ratio 0; N=32 vs N=1; per-task Brier pooled over seeds and r_min",
       TestKind::paired_t, Alternative::less, "mean delta BS >= 0"},
  };
  return family;
}

namespace {

HypothesisResult blank(HypothesisId id) {
  HypothesisResult h;
  h.id = id;
  return h;
}

class MissingSlice : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Filter = std::function<bool(const SweepRecord&)>;

std::vector<const SweepRecord*> select(std::span<const SweepRecord> records, const Filter& keep) {
  std::vector<const SweepRecord*> out;
  for (const auto& r : records)
    if (keep(r)) out.push_back(&r);
  return out;
}

std::vector<const SweepRecord*> require(std::span<const SweepRecord> records, const Filter& keep,
                                        const std::string& what) {
  auto out = select(records, keep);
  if (out.empty()) throw MissingSlice("missing slice: " + what);
  return out;
}

std::string fmt(double v) { return format_double(v); }

double sq(double v) { return v * v; }

// Mean Brier per task id.
std::map<int, double> per_task_brier(const std::vector<const SweepRecord*>& recs) {
  std::map<int, std::pair<double, double>> acc;
  for (const auto* r : recs) {
    auto& a = acc[r->task_id];
    a.first += sq(r->r_sel - r->y_sel);
    a.second += 1;
  }
  std::map<int, double> out;
  for (const auto& [id, a] : acc) out[id] = a.first / a.second;
  return out;
}

struct PairedBrier {
  std::vector<double> treated, control, diffs;
};

PairedBrier pair_by_task(const std::map<int, double>& treated, const std::map<int, double>& control) {
  PairedBrier out;
  for (const auto& [id, v] : treated) {
    auto it = control.find(id);
    if (it == control.end()) throw MissingSlice("task " + std::to_string(id) + " absent from the comparison cell");
    out.treated.push_back(v);
    out.control.push_back(it->second);
    out.diffs.push_back(v - it->second);
  }
  if (out.diffs.size() != control.size()) throw MissingSlice("compared cells cover different task sets");
  return out;
}

ordered_json interval_json(const Interval& ci) { return ordered_json::array({ci.lo, ci.hi}); }

Interval mean_ci(const std::vector<double>& x, const AnalysisOptions& o, std::uint64_t salt) {
  return bootstrap_ci(x, mean_of, o.bootstrap_resamples, 0.95, o.bootstrap_seed + salt);
}

bool has(const std::vector<double>& v, double x) { return std::find(v.begin(), v.end(), x) != v.end(); }

HypothesisResult brier_contrast(HypothesisId id, std::span<const SweepRecord> records, const Filter& treated,
                                const Filter& control, const std::string& treated_name,
                                const std::string& control_name, Alternative alt, const AnalysisOptions& o) {
  HypothesisResult h = blank(id);
  const auto t = require(records, treated, treated_name);
  const auto c = require(records, control, control_name);
  const auto pb = pair_by_task(per_task_brier(t), per_task_brier(c));
  const auto test = paired_t(pb.diffs, alt);
  const double mean_diff = mean_of(pb.diffs);
  const double base = mean_of(pb.control);
  h.statistic = test.statistic;
  h.p_raw = test.p_value;
  h.effect_size = cohens_d(pb.treated, pb.control);
  h.effect_kind = "cohens_d_pooled_sd";
  h.falsified = alt == Alternative::greater ? !(mean_diff > 0) : !(mean_diff < 0);
  h.details["tasks"] = pb.diffs.size();
  h.details["df"] = *test.df;
  h.details["brier_treated"] = mean_of(pb.treated);
  h.details["brier_control"] = base;
  h.details["delta_brier"] = mean_diff;
  h.details["relative_change"] = base > 0 ? mean_diff / base : 0.0;
  h.details["delta_brier_ci95"] = interval_json(mean_ci(pb.diffs, o, static_cast<std::uint64_t>(id)));
  return h;
}

HypothesisResult run_h1(std::span<const SweepRecord> rec, const AnalysisOptions& o) {
  const int N = o.focus_N;
  const double w = o.gated_ratio;
  return brier_contrast(
      HypothesisId::H1, rec, [&](const SweepRecord& r) { return r.N == N && r.ratio == w; },
      [&](const SweepRecord& r) { return r.N == N && r.ratio == 0.0; }, "N=" + std::to_string(N) + ", ratio=" + fmt(w),
      "N=" + std::to_string(N) + ", ratio=0", Alternative::greater, o);
}

HypothesisResult run_h6(std::span<const SweepRecord> rec, const AnalysisOptions& o) {
  return brier_contrast(
      HypothesisId::H6, rec, [&](const SweepRecord& r) { return r.N == o.focus_N && r.ratio == 0.0; },
      [&](const SweepRecord& r) { return r.N == o.base_N && r.ratio == 0.0; },
      "N=" + std::to_string(o.focus_N) + ", ratio=0", "N=" + std::to_string(o.base_N) + ", ratio=0", Alternative::less,
      o);
}

HypothesisResult run_h2(std::span<const SweepRecord> rec, const AnalysisOptions& o, std::optional<double>& plateau) {
  HypothesisResult h = blank(HypothesisId::H2);
  std::vector<std::vector<double>> groups;
  std::vector<double> means;
  ordered_json by_ratio = ordered_json::array();
  for (double w : o.trend_ratios) {
    const auto slice = require(
        rec, [&](const SweepRecord& r) { return r.N == o.focus_N && r.r_min == o.focus_r_min && r.ratio == w && r.binding; },
        "binding records at N=" + std::to_string(o.focus_N) + ", r_min=" + fmt(o.focus_r_min) + ", ratio=" + fmt(w));
    std::vector<double> d;
    for (const auto* r : slice) d.push_back(r->r_sel - r->p_true);
    means.push_back(mean_of(d));
    by_ratio.push_back({{"ratio", w}, {"n", d.size()}, {"mean_delta_bind", means.back()}});
    groups.push_back(std::move(d));
  }
  const auto jt = jonckheere_terpstra(groups, Alternative::greater);
  h.statistic = jt.statistic;
  h.p_raw = jt.p_value;
  h.falsified = !(jt.statistic > 0);
  h.effect_kind = "spearman_rho";
  try {
    h.effect_size = spearman_rho(o.trend_ratios, means);
  } catch (const DegenerateSampleError&) {
    h.details["spearman_note"] = "undefined: constant group means";
  }
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < o.trend_ratios.size(); ++i)
    if (has(o.plateau_ratios, o.trend_ratios[i])) {
      lo = std::min(lo, means[i]);
      hi = std::max(hi, means[i]);
    }
  if (hi >= lo) plateau = hi - lo;
  h.details["jt_U"] = *jt.effect_size;
  h.details["jt_variance"] = "no tie correction";
  h.details["by_ratio"] = by_ratio;
  h.details["plateau_ratios"] = o.plateau_ratios;
  h.details["plateau_spread"] = plateau ? ordered_json(*plateau) : ordered_json(nullptr);
  return h;
}

HypothesisResult run_h4(std::span<const SweepRecord> rec, const AnalysisOptions& o) {
  HypothesisResult h = blank(HypothesisId::H4);
  std::set<double> thresholds;
  for (const auto& r : rec)
    if (r.N == o.focus_N) thresholds.insert(r.r_min);
  if (thresholds.empty()) throw MissingSlice("missing slice: N=" + std::to_string(o.focus_N));

  ordered_json rows = ordered_json::array();
  double worst_p = 0.0, worst_z = INFINITY, min_excess = INFINITY;
  bool any_falsified = false;
  for (double t : thresholds) {
    auto count = [&](bool gated) {
      const auto slice = require(
          rec,
          [&](const SweepRecord& r) {
            return r.N == o.focus_N && r.r_min == t && r.binding && (gated ? r.ratio > 0 : r.ratio == 0.0);
          },
          std::string(gated ? "gated" : "ungated") + " binding records at N=" + std::to_string(o.focus_N) +
              ", r_min=" + fmt(t));
      std::size_t hits = 0;
      for (const auto* r : slice)
        if (r->r_sel >= t && r->r_sel <= t + o.threshold_window) ++hits;
      return std::pair{hits, slice.size()};
    };
    const auto [x1, n1] = count(true);
    const auto [x2, n2] = count(false);
    const auto z = two_prop_z(x1, n1, x2, n2, Alternative::greater);
    const double excess = *z.effect_size;
    rows.push_back({{"r_min", t},
                    {"z", z.statistic},
                    {"p", z.p_value},
                    {"gated_mass", static_cast<double>(x1) / n1},
                    {"ungated_mass", static_cast<double>(x2) / n2},
                    {"excess_pp", 100.0 * excess},
                    {"gated_n", n1},
                    {"ungated_n", n2}});
    worst_p = std::max(worst_p, z.p_value);
    worst_z = std::min(worst_z, z.statistic);
    min_excess = std::min(min_excess, excess);
    any_falsified = any_falsified || !(z.statistic > 0);
  }
  h.statistic = worst_z;
  h.p_raw = worst_p;
  h.effect_size = 100.0 * min_excess;
  h.effect_kind = "min_excess_percentage_points";
  h.falsified = any_falsified;
  h.details["window"] = o.threshold_window;
  h.details["per_r_min"] = rows;
  h.details["aggregation"] = "every r_min must pass; statistic is the minimum z, p the maximum p";
  return h;
}

HypothesisResult run_h5(std::span<const SweepRecord> rec, const AnalysisOptions& o) {
  HypothesisResult h = blank(HypothesisId::H5);
  const auto slice = require(
      rec, [&](const SweepRecord& r) { return r.N == o.focus_N && r.ratio > 0; },
      "N=" + std::to_string(o.focus_N) + ", ratio>0");
  std::vector<double> bind, free;
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> per_ratio;
  for (const auto* r : slice) {
    const double d = r->r_sel - r->p_true;
    (r->binding ? bind : free).push_back(d);
    (r->binding ? per_ratio[r->ratio].first : per_ratio[r->ratio].second).push_back(d);
  }
  if (bind.empty() || free.empty()) throw MissingSlice("missing slice: H5 needs binding and non-binding records");
  const auto t = welch_t(bind, free, Alternative::greater);
  const double mb = mean_of(bind), mf = mean_of(free);
  h.statistic = t.statistic;
  h.p_raw = t.p_value;
  h.effect_size = cohens_d(bind, free);
  h.effect_kind = "cohens_d_pooled_sd";
  h.falsified = !(mb > mf);
  h.details["df"] = *t.df;
  h.details["mean_delta_bind"] = mb;
  h.details["mean_delta_nonbind"] = mf;
  h.details["n_bind"] = bind.size();
  h.details["n_nonbind"] = free.size();
  h.details["delta_bind_ci95"] = interval_json(mean_ci(bind, o, 5));
  ordered_json rows = ordered_json::array();
  for (const auto& [w, groups] : per_ratio) {
    ordered_json row{{"ratio", w}};
    row["mean_delta_bind"] = groups.first.empty() ? ordered_json(nullptr) : ordered_json(mean_of(groups.first));
    row["mean_delta_nonbind"] = groups.second.empty() ? ordered_json(nullptr) : ordered_json(mean_of(groups.second));
    rows.push_back(row);
  }
  h.details["per_ratio"] = rows;
  return h;
}

}  // namespace

GeometryResult surface_geometry(std::span<const SweepRecord> records, double slack) {
  std::set<int> Ns;
  std::set<double> thresholds;
  for (const auto& r : records) {
    Ns.insert(r.N);
    thresholds.insert(r.r_min);
  }
  GeometryResult g;
  std::vector<double> xs, rates;
  for (int N : Ns) {
    GeometryRow row{N};
    for (double t : thresholds) {
      const auto pts = surface(records, N, t);
      if (pts.size() < 3) continue;
      const auto m = midpoint_violation_rate(pts, slack);
      row.violations += m.violations.size();
      row.triples += m.triples;
    }
    if (row.triples == 0) continue;
    row.rate = static_cast<double>(row.violations) / static_cast<double>(row.triples);
    row.ci = clopper_pearson(row.violations, row.triples);
    g.pooled_violations += row.violations;
    g.pooled_triples += row.triples;
    xs.push_back(N);
    rates.push_back(row.rate);
    g.rows.push_back(row);
  }
  if (g.pooled_triples > 0) g.pooled_ci = clopper_pearson(g.pooled_violations, g.pooled_triples);
  if (xs.size() >= 2) {
    try {
      g.spearman = spearman_rho(xs, rates);
    } catch (const DegenerateSampleError&) {
    }
  }
  return g;
}

BatteryResult run_hypotheses(std::span<const SweepRecord> records, std::span<const SweepRecord> random_records,
                             const AnalysisOptions& opts) {
  BatteryResult out;
  out.fingerprint = opts.fingerprint;
  std::set<std::string> modes;
  for (const auto& r : records) modes.insert(r.mode);
  if (modes.size() > 1) throw std::invalid_argument("record set mixes payoff modes");
  out.mode = modes.empty() ? "" : *modes.begin();

  for (const auto& spec : hypothesis_family()) {
    HypothesisResult h = blank(spec.id);
    try {
      switch (spec.id) {
        case HypothesisId::H1: h = run_h1(records, opts); break;
        case HypothesisId::H2: h = run_h2(records, opts, out.plateau_spread); break;
        case HypothesisId::H4: h = run_h4(records, opts); break;
        case HypothesisId::H5: h = run_h5(records, opts); break;
        case HypothesisId::H6: h = run_h6(records, opts); break;
      }
    } catch (const std::exception& e) {
      h = blank(spec.id);
      h.error = e.what();
    }
    out.hypotheses.push_back(std::move(h));
  }

  std::vector<double> raw;
  for (const auto& h : out.hypotheses) raw.push_back(h.p_raw);
  const auto holm = holm_correct(raw, 0.05);
  for (std::size_t i = 0; i < out.hypotheses.size(); ++i) {
    auto& h = out.hypotheses[i];
    h.p_holm = holm.adjusted[i];
    h.pass = !h.error && !h.falsified && h.p_holm < 0.05;
  }

  out.geometry = surface_geometry(records, opts.midpoint_slack);

  if (!random_records.empty()) {
    RandomControl rc;
    std::map<double, std::pair<double, double>> acc;
    for (const auto& r : random_records)
      if (r.N == opts.focus_N && r.binding) {
        auto& a = acc[r.ratio];
        a.first += r.r_sel - r.p_true;
        a.second += 1;
      }
    for (const auto& [w, a] : acc) {
      rc.delta_bind.emplace_back(w, a.first / a.second);
      rc.max_abs = std::max(rc.max_abs, std::abs(a.first / a.second));
    }
    if (!rc.delta_bind.empty()) out.random_control = rc;
  }
  return out;
}

ordered_json results_document(const BatteryResult& r) {
  ordered_json doc;
  doc["schema"] = "gatelab.hypothesis_results/1";
  doc["config_fingerprint"] = r.fingerprint;
  doc["mode"] = r.mode;
  doc["conventions"] = {{"holm_family", {"H1", "H2", "H4", "H5", "H6"}},
                        {"alpha", 0.05},
                        {"cohens_d", "pooled standard deviation"},
                        {"jonckheere_variance", "no tie correction; ties weighted 1/2 in U"},
                        {"bootstrap", "percentile, 10000 resamples unless configured otherwise"},
                        {"delegation", "delegated contexts credited with the optimal action's reward"}};
  ordered_json hyps = ordered_json::array();
  const auto& family = hypothesis_family();
  for (std::size_t i = 0; i < r.hypotheses.size(); ++i) {
    const auto& h = r.hypotheses[i];
    const auto& spec = family[i];
    ordered_json row;
    row["id"] = to_string(h.id);
    row["name"] = spec.name;
    row["test"] = to_string(spec.test);
    row["direction"] = spec.direction == Alternative::greater ? "greater" : spec.direction == Alternative::less ? "less" : "two-sided";
    row["slice"] = spec.slice;
    row["statistic"] = h.statistic ? ordered_json(*h.statistic) : ordered_json(nullptr);
    row["p"] = h.p_raw;
    row["p_holm"] = h.p_holm;
    row["effect_size"] = h.effect_size ? ordered_json(*h.effect_size) : ordered_json(nullptr);
    row["effect_kind"] = h.effect_kind;
    row["falsification"] = spec.falsified_when;
    row["falsified"] = h.falsified;
    row["decision"] = h.pass ? "pass" : "fail";
    row["error"] = h.error ? ordered_json(*h.error) : ordered_json(nullptr);
    row["details"] = h.details;
    hyps.push_back(row);
  }
  doc["hypotheses"] = hyps;

  ordered_json geo;
  ordered_json rows = ordered_json::array();
  for (const auto& g : r.geometry.rows)
    rows.push_back({{"N", g.N},
                    {"violations", g.violations},
                    {"triples", g.triples},
                    {"rate", g.rate},
                    {"ci95", interval_json(g.ci)}});
  geo["slack"] = "absolute, per axis";
  geo["by_N"] = rows;
  geo["spearman_N_rate"] = r.geometry.spearman ? ordered_json(*r.geometry.spearman) : ordered_json(nullptr);
  geo["pooled_violations"] = r.geometry.pooled_violations;
  geo["pooled_triples"] = r.geometry.pooled_triples;
  geo["pooled_ci95"] = r.geometry.pooled_ci ? interval_json(*r.geometry.pooled_ci) : ordered_json(nullptr);
  doc["geometry"] = geo;

  if (r.random_control) {
    ordered_json rc = ordered_json::array();
    for (const auto& [w, d] : r.random_control->delta_bind) rc.push_back({{"ratio", w}, {"mean_delta_bind", d}});
    doc["random_selection_control"] = {{"by_ratio", rc}, {"max_abs_delta_bind", r.random_control->max_abs}};
  } else {
    doc["random_selection_control"] = nullptr;
  }
  return doc;
}

void emit_results(const BatteryResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write results to " + path.string());
  out << results_document(result).dump(2) << '\n';
  if (!out) throw std::runtime_error("error while writing results to " + path.string());
}

void write_surface_csv(const std::filesystem::path& path, std::span<const SweepRecord> records) {
  std::set<int> Ns;
  std::set<double> thresholds;
  for (const auto& r : records) {
    Ns.insert(r.N);
    thresholds.insert(r.r_min);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "N,r_min,ratio,H,C,A\n";
  for (int N : Ns)
    for (double t : thresholds)
      for (const auto& p : surface(records, N, t))
        out << N << ',' << fmt(t) << ',' << fmt(p.ratio) << ',' << fmt(p.H) << ',' << fmt(p.C) << ',' << fmt(p.A)
            << '\n';
}

void write_geometry_csv(const std::filesystem::path& path, const GeometryResult& g) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "N,violations,triples,rate,ci_lo,ci_hi\n";
  for (const auto& row : g.rows)
    out << row.N << ',' << row.violations << ',' << row.triples << ',' << fmt(row.rate) << ',' << fmt(row.ci.lo)
        << ',' << fmt(row.ci.hi) << '\n';
}

}  // namespace gatelab
