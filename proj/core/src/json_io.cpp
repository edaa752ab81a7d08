#include "netzero/json_io.hpp"

#include "netzero/error.hpp"

namespace netzero {

namespace {

template <typename T>
T get(const json& j, const char* key) {
  if (!j.is_object()) fail(ErrorKind::schema, std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::schema, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::schema, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object()) fail(ErrorKind::schema, std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return get<T>(j, key);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return get<T>(j, key);
}

// Wraps calendar/domain parse errors of a nested value as schema errors.
template <typename Fn>
auto as_schema(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::schema) throw;
    fail(ErrorKind::schema, std::string(what) + ": " + e.what());
  }
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

YearMonth month_field(const json& j, const char* key) {
  const auto s = get<std::string>(j, key);
  return as_schema(key, [&] { return YearMonth::parse(s); });
}

Date date_field(const std::string& s, const char* what) {
  return as_schema(what, [&] { return Date::parse(s); });
}

const json& array_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::schema, std::string("missing field '") + key + "'");
  const json& a = j.at(key);
  if (!a.is_array()) fail(ErrorKind::schema, std::string("field '") + key + "' must be an array");
  return a;
}

json to_json(const DateRange& r) { return {{"first", r.first.to_string()}, {"last", r.last.to_string()}}; }

DateRange date_range_from_json(const json& j) {
  return {date_field(get<std::string>(j, "first"), "first"), date_field(get<std::string>(j, "last"), "last")};
}

json date_map(const std::map<Date, double>& m) {
  json out = json::object();
  for (const auto& [d, v] : m) out[d.to_string()] = v;
  return out;
}

std::map<Date, double> date_map_from_json(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_object()) fail(ErrorKind::schema, std::string("field '") + key + "' must be an object");
  std::map<Date, double> out;
  for (const auto& [k, v] : j.at(key).items()) {
    if (!v.is_number()) fail(ErrorKind::schema, std::string("field '") + key + "' holds a non-number");
    out[date_field(k, key)] = v.get<double>();
  }
  return out;
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport m;
  m.mse = get<double>(j, "mse");
  m.r2_adj = get_opt<double>(j, "r2_adj");
  m.n_samples = get<std::size_t>(j, "n_samples");
  m.n_features = get<std::size_t>(j, "n_features");
  return m;
}

}  // namespace

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::schema, std::string("malformed JSON: ") + e.what());
  }
}

json to_json(const FacilityConfig& c) {
  return {{"id", c.id},
          {"name", c.name},
          {"retention_months", c.retention_months},
          {"imputation_mse_threshold", c.imputation_mse_threshold},
          {"emission_factor", c.emission_factor},
          {"time_zone", c.time_zone},
          {"currency", c.currency}};
}

FacilityConfig facility_config_from_json(const json& j) {
  FacilityConfig c;
  c.id = get<std::string>(j, "id");
  c.name = get_or<std::string>(j, "name", c.id);
  c.retention_months = get_or<int>(j, "retention_months", c.retention_months);
  c.imputation_mse_threshold = get_or<double>(j, "imputation_mse_threshold", c.imputation_mse_threshold);
  c.emission_factor = get_or<double>(j, "emission_factor", c.emission_factor);
  c.time_zone = get_or<std::string>(j, "time_zone", c.time_zone);
  c.currency = get_or<std::string>(j, "currency", c.currency);
  as_schema("facility config", [&] {
    c.validate();
    return 0;
  });
  return c;
}

json to_json(const IngestReport& r) {
  json reasons = json::array();
  for (const auto& row : r.reasons) reasons.push_back({{"line", row.line}, {"reason", row.reason}});
  return {{"accepted", r.accepted}, {"rejected", r.rejected}, {"reasons", reasons}};
}

json to_json(const MeterReading& r) {
  return {{"timestamp", r.timestamp.to_string()}, {"kwh", r.kwh}, {"quality", to_string(r.quality)}};
}

json to_json(const ImputationResult& r) {
  json filled = json::array();
  for (const auto& m : r.filled) filled.push_back(to_json(m));
  return {{"facility_id", r.facility_id},
          {"month", r.month.to_string()},
          {"filled", filled},
          {"iterations", r.iterations},
          {"final_monthly_mse", r.final_monthly_mse},
          {"mse_trace", r.mse_trace},
          {"invoice_kwh", r.invoice_kwh},
          {"observed_kwh", r.observed_kwh}};
}

json to_json(const RegressorSpec& s) {
  return {{"algorithm", to_string(s.algorithm)},
          {"max_features", opt(s.max_features)},
          {"learning_rate", opt(s.learning_rate)},
          {"n_estimators", s.n_estimators},
          {"random_state", s.random_state},
          {"max_depth", s.max_depth},
          {"min_samples_leaf", s.min_samples_leaf},
          {"max_bins", s.max_bins},
          {"bootstrap", s.bootstrap}};
}

RegressorSpec regressor_spec_from_json(const json& j) {
  RegressorSpec s;
  const auto algo = get<std::string>(j, "algorithm");
  s.algorithm = as_schema("algorithm", [&] { return parse_algorithm(algo); });
  s.max_features = get_opt<double>(j, "max_features");
  s.learning_rate = get_opt<double>(j, "learning_rate");
  s.n_estimators = get_or<int>(j, "n_estimators", s.n_estimators);
  s.random_state = get_or<std::uint64_t>(j, "random_state", s.random_state);
  s.max_depth = get_or<int>(j, "max_depth", s.max_depth);
  s.min_samples_leaf = get_or<int>(j, "min_samples_leaf", s.min_samples_leaf);
  s.max_bins = get_or<int>(j, "max_bins", s.max_bins);
  s.bootstrap = get_or<bool>(j, "bootstrap", s.bootstrap);
  as_schema("regressor spec", [&] {
    s.validate();
    return 0;
  });
  return s;
}

json to_json(const TrainedModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    trees.push_back(std::move(nodes));
  }
  return {{"format_version", TrainedModel::kFormatVersion},
          {"spec", to_json(m.spec)},
          {"feature_schema", m.feature_schema},
          {"train_range", m.train_range ? to_json(*m.train_range) : json(nullptr)},
          {"base_score", m.base_score},
          {"target_min", m.target_min},
          {"target_max", m.target_max},
          {"trees", trees}};
}

TrainedModel trained_model_from_json(const json& j) {
  const int version = get<int>(j, "format_version");
  if (version != TrainedModel::kFormatVersion) {
    fail(ErrorKind::schema, "unsupported model format_version " + std::to_string(version));
  }
  TrainedModel m;
  m.spec = regressor_spec_from_json(j.at("spec"));
  m.feature_schema = get<std::vector<std::string>>(j, "feature_schema");
  if (j.contains("train_range") && !j.at("train_range").is_null()) m.train_range = date_range_from_json(j.at("train_range"));
  m.base_score = get<double>(j, "base_score");
  m.target_min = get<double>(j, "target_min");
  m.target_max = get<double>(j, "target_max");
  for (const auto& t : array_field(j, "trees")) {
    if (!t.is_array()) fail(ErrorKind::schema, "tree must be an array of nodes");
    RegressionTree tree;
    for (const auto& n : t) {
      if (!n.is_array() || n.size() != 5) fail(ErrorKind::schema, "tree node must be [feature, threshold, left, right, value]");
      try {
        tree.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(), n[4].get<double>()});
      } catch (const json::exception&) {
        fail(ErrorKind::schema, "tree node has the wrong types");
      }
    }
    const int count = static_cast<int>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) continue;
      if (n.feature >= static_cast<int>(m.feature_schema.size()) || n.left <= 0 || n.left >= count || n.right <= 0 ||
          n.right >= count) {
        fail(ErrorKind::schema, "tree node references out of range");
      }
    }
    if (tree.nodes.empty()) fail(ErrorKind::schema, "empty tree");
    m.trees.push_back(std::move(tree));
  }
  return m;
}

json to_json(const BacktestWindow& w) {
  return {{"train_end", w.train_end.to_string()}, {"test_month", w.test_month.to_string()}};
}

json to_json(const MetricReport& m) {
  return {{"mse", m.mse}, {"r2_adj", opt(m.r2_adj)}, {"n_samples", m.n_samples}, {"n_features", m.n_features}};
}

json to_json(const SpecEvaluation& e) {
  json per = json::array();
  for (const auto& m : e.per_window) per.push_back(to_json(m));
  return {{"spec", to_json(e.spec)}, {"description", e.spec.describe()}, {"average", to_json(e.average)}, {"per_window", per}};
}

json to_json(const ModelSelectionReport& r) {
  json windows = json::array(), evaluated = json::array();
  for (const auto& w : r.windows) windows.push_back(to_json(w));
  for (const auto& e : r.evaluated) evaluated.push_back(to_json(e));
  return {{"facility_id", r.facility_id},
          {"task", to_string(r.task)},
          {"target_month", r.target_month.to_string()},
          {"windows", windows},
          {"evaluated", evaluated},
          {"winner", r.winner}};
}

ModelSelectionReport selection_report_from_json(const json& j) {
  ModelSelectionReport r;
  r.facility_id = get<std::string>(j, "facility_id");
  const auto task = get<std::string>(j, "task");
  r.task = as_schema("task", [&] { return parse_task(task); });
  r.target_month = month_field(j, "target_month");
  for (const auto& w : array_field(j, "windows")) r.windows.push_back({month_field(w, "train_end"), month_field(w, "test_month")});
  for (const auto& e : array_field(j, "evaluated")) {
    SpecEvaluation ev;
    ev.spec = regressor_spec_from_json(e.at("spec"));
    ev.average = metric_report_from_json(e.at("average"));
    for (const auto& m : array_field(e, "per_window")) ev.per_window.push_back(metric_report_from_json(m));
    r.evaluated.push_back(std::move(ev));
  }
  r.winner = get<std::size_t>(j, "winner");
  if (r.winner >= r.evaluated.size()) fail(ErrorKind::schema, "winner index out of range");
  return r;
}

json to_json(const ForecastBundle& b) {
  return {{"facility_id", b.facility_id},
          {"month", b.month.to_string()},
          {"daily_occupancy", date_map(b.daily_occupancy)},
          {"daily_kwh", date_map(b.daily_kwh)},
          {"monthly_kwh", b.monthly_kwh},
          {"occupancy_spec", to_json(b.occupancy_spec)},
          {"demand_spec", to_json(b.demand_spec)},
          {"models_selected_for", b.models_selected_for.to_string()},
          {"generated_at", b.generated_at}};
}

ForecastBundle forecast_bundle_from_json(const json& j) {
  ForecastBundle b;
  b.facility_id = get<std::string>(j, "facility_id");
  b.month = month_field(j, "month");
  b.daily_occupancy = date_map_from_json(j, "daily_occupancy");
  b.daily_kwh = date_map_from_json(j, "daily_kwh");
  b.monthly_kwh = get<double>(j, "monthly_kwh");
  b.occupancy_spec = regressor_spec_from_json(j.at("occupancy_spec"));
  b.demand_spec = regressor_spec_from_json(j.at("demand_spec"));
  b.models_selected_for = month_field(j, "models_selected_for");
  b.generated_at = get_or<std::string>(j, "generated_at", "");
  return b;
}

json to_json(const HistoricComparison& h) {
  json days = json::array();
  for (const auto& d : h.days) {
    days.push_back({{"date", d.date.to_string()},
                    {"actual_kwh", opt(d.actual_kwh)},
                    {"forecast_kwh", opt(d.forecast_kwh)},
                    {"actual_quality", d.actual_quality}});
  }
  return {{"facility_id", h.facility_id},
          {"month", h.month.to_string()},
          {"days", days},
          {"actual_total", opt(h.actual_total)},
          {"forecast_total", opt(h.forecast_total)}};
}

Rates rates_from_json(const json& j) {
  Rates r{get<Minor>(j, "green_rate"), get<Minor>(j, "conventional_rate")};
  as_schema("rates", [&] {
    r.validate();
    return 0;
  });
  return r;
}

json to_json(const Rates& r) { return {{"green_rate", r.green_rate}, {"conventional_rate", r.conventional_rate}}; }

json to_json(const InvoiceResult& r) {
  return {{"total_cost", r.total_cost},
          {"green_billed_kwh", r.green_billed_kwh},
          {"conventional_billed_kwh", r.conventional_billed_kwh},
          {"green_consumed_kwh", r.green_consumed_kwh},
          {"gp_utilization", r.gp_utilization},
          {"wasted_green_kwh", r.wasted_green_kwh}};
}

json to_json(const WhatIfPoint& p) { return {{"ask_kwh", p.ask_kwh}, {"invoice", to_json(p.invoice)}}; }

json to_json(const AskRecommendation& a) { return {{"ask_kwh", a.ask_kwh}, {"rationale", a.rationale}}; }

json to_json(const KpiRow& k) {
  return {{"facility_id", k.facility_id},
          {"period", k.period},
          {"gp_utilization_pct", k.gp_utilization_pct},
          {"co2_reduction_mtco2e", k.co2_reduction_mtco2e},
          {"savings_per_unit", k.savings_per_unit}};
}

KpiRow kpi_row_from_json(const json& j) {
  KpiRow k;
  k.facility_id = get<std::string>(j, "facility_id");
  k.period = get_or<std::string>(j, "period", "");
  k.gp_utilization_pct = get<double>(j, "gp_utilization_pct");
  k.co2_reduction_mtco2e = get<double>(j, "co2_reduction_mtco2e");
  k.savings_per_unit = get<double>(j, "savings_per_unit");
  if (!(k.gp_utilization_pct >= 0.0 && k.gp_utilization_pct <= 100.0)) {
    fail(ErrorKind::schema, "gp_utilization_pct must lie in [0, 100]");
  }
  return k;
}

json to_json(const OffsetProject& p) {
  return {{"name", p.name}, {"unit_cost", p.unit_cost}, {"min_share", p.min_share}, {"enabled", p.enabled}};
}

json to_json(const OffsetInstance& i) {
  json projects = json::array();
  for (const auto& p : i.projects) projects.push_back(to_json(p));
  return {{"projects", projects},
          {"mode", to_string(i.mode)},
          {"budget", opt(i.budget)},
          {"target_offset", opt(i.target_offset)},
          {"granularity", i.granularity},
          {"annotations", i.annotations}};
}

OffsetInstance offset_instance_from_json(const json& j) {
  OffsetInstance inst;
  for (const auto& p : array_field(j, "projects")) {
    OffsetProject proj;
    proj.name = get<std::string>(p, "name");
    proj.unit_cost = get<Minor>(p, "unit_cost");
    proj.min_share = get_or<double>(p, "min_share", 0.0);
    proj.enabled = get_or<bool>(p, "enabled", true);
    inst.projects.push_back(std::move(proj));
  }
  const auto mode = get_or<std::string>(j, "mode", "max_offset");
  inst.mode = as_schema("mode", [&] { return parse_offset_mode(mode); });
  inst.budget = get_opt<Minor>(j, "budget");
  inst.target_offset = get_opt<double>(j, "target_offset");
  inst.granularity = get_or<std::int64_t>(j, "granularity", 1);
  inst.annotations = get_or<std::vector<std::string>>(j, "annotations", {});
  return inst;
}

json to_json(const OffsetPlan& p) {
  json allocations = json::array();
  for (const auto& a : p.allocations) allocations.push_back({{"project", a.project}, {"units", a.units}, {"cost", a.cost}});
  return {{"mode", to_string(p.mode)},
          {"feasible", p.feasible},
          {"allocations", allocations},
          {"total_units", p.total_units},
          {"total_offset", p.total_offset},
          {"total_cost", p.total_cost},
          {"violations", p.violations},
          {"nodes_explored", p.nodes_explored}};
}

OffsetPlan offset_plan_from_json(const json& j) {
  OffsetPlan p;
  const auto mode = get<std::string>(j, "mode");
  p.mode = as_schema("mode", [&] { return parse_offset_mode(mode); });
  p.feasible = get<bool>(j, "feasible");
  for (const auto& a : array_field(j, "allocations")) {
    p.allocations.push_back({get<std::string>(a, "project"), get<std::int64_t>(a, "units"), get<Minor>(a, "cost")});
  }
  p.total_units = get<std::int64_t>(j, "total_units");
  p.total_offset = get<double>(j, "total_offset");
  p.total_cost = get<Minor>(j, "total_cost");
  p.violations = get_or<std::vector<std::string>>(j, "violations", {});
  p.nodes_explored = get_or<std::uint64_t>(j, "nodes_explored", 0);
  return p;
}

}  // namespace netzero
