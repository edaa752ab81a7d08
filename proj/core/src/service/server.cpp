#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "netzero/error.hpp"
#include "netzero/imputation.hpp"
#include "netzero/json_io.hpp"
#include "netzero/offset.hpp"
#include "netzero/service.hpp"
#include "netzero/text.hpp"

namespace fs = std::filesystem;

namespace netzero {

// ---------------------------------------------------------------------------
// BundleStore

namespace {

bool same_content(ForecastBundle a, const ForecastBundle& b) {
  a.generated_at = b.generated_at;
  return a == b;
}

fs::path bundle_dir(const fs::path& dir, std::string_view facility, YearMonth month) {
  return dir / std::string(facility) / month.to_string();
}

std::string version_name(int version) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d.json", version);
  return buf;
}

}  // namespace

BundleStore::BundleStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(*dir_);
  std::vector<fs::path> files;
  for (const auto& f : fs::recursive_directory_iterator(*dir_)) {
    if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto b = forecast_bundle_from_json(parse_json(read_file(f)));
    auto& slot = bundles_[{b.facility_id, b.month}];
    slot.version = std::max(slot.version, std::stoi(f.stem().string()));
    slot.latest = std::move(b);
  }
}

ForecastBundle BundleStore::put(const ForecastBundle& bundle) {
  std::lock_guard lock(mutex_);
  auto& slot = bundles_[{bundle.facility_id, bundle.month}];
  if (slot.version > 0 && same_content(slot.latest, bundle)) return slot.latest;
  ++slot.version;
  if (dir_) {
    const auto d = bundle_dir(*dir_, bundle.facility_id, bundle.month);
    fs::create_directories(d);
    write_file_atomic(d / version_name(slot.version), to_json(bundle).dump(2) + "\n");
  }
  slot.latest = bundle;
  return bundle;
}

std::optional<ForecastBundle> BundleStore::get(std::string_view facility, YearMonth month) const {
  std::lock_guard lock(mutex_);
  auto it = bundles_.find({std::string(facility), month});
  if (it == bundles_.end()) return std::nullopt;
  return it->second.latest;
}

int BundleStore::versions(std::string_view facility, YearMonth month) const {
  std::lock_guard lock(mutex_);
  auto it = bundles_.find({std::string(facility), month});
  return it == bundles_.end() ? 0 : it->second.version;
}

// ---------------------------------------------------------------------------
// Shared payloads

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::schema: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::precondition: return 409;
    case ErrorKind::infeasible:
    case ErrorKind::convergence: return 422;
  }
  return 500;
}

json error_payload(ErrorKind kind, std::string_view message) {
  return {{"error", {{"kind", to_string(kind)}, {"message", message}}}};
}

json whatif_payload(const FacilityConfig& facility, std::optional<YearMonth> month, double forecast_kwh,
                    const Rates& rates, std::span<const std::int64_t> grid, double risk_margin) {
  if (!(forecast_kwh >= 0.0)) fail(ErrorKind::invalid_argument, "forecast_kwh must be >= 0");
  const auto consumption = std::llround(forecast_kwh);
  json curve = json::array();
  for (const auto& p : whatif_curve(consumption, rates, grid)) curve.push_back(to_json(p));
  return {{"facility_id", facility.id},
          {"month", month ? json(month->to_string()) : json(nullptr)},
          {"forecast_kwh", forecast_kwh},
          {"consumption_kwh", consumption},
          {"currency", facility.currency},
          {"rates", to_json(rates)},
          {"curve", curve},
          {"recommendation", to_json(recommend_ask(forecast_kwh, rates, risk_margin))}};
}

json kpi_payload(const FacilityView& view, YearMonth from, YearMonth to) {
  if (to < from) fail(ErrorKind::invalid_argument, "kpi range: 'to' precedes 'from'");
  std::vector<KpiRow> rows;
  for (YearMonth m = from; m <= to; m = m + 1) {
    const InvoiceRecord* inv = view.invoice(m);
    if (!inv) continue;
    rows.push_back(kpi_from_invoices(view.config().id, m.to_string(), std::span(inv, 1), view.config().emission_factor));
  }
  if (rows.empty()) {
    fail(ErrorKind::precondition, "no invoices for '" + view.config().id + "' between " + from.to_string() + " and " +
                                      to.to_string());
  }
  KpiRow summary = kpi_summary(rows);
  summary.facility_id = view.config().id;
  summary.period = from.to_string() + ".." + to.to_string();
  json out_rows = json::array();
  for (const auto& r : rows) out_rows.push_back(to_json(r));
  return {{"facility_id", view.config().id},
          {"currency", view.config().currency},
          {"rows", out_rows},
          {"summary", to_json(summary)}};
}

json retrain_table_payload(const ModelSelectionReport& report) {
  std::vector<std::size_t> order(report.evaluated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.evaluated[a].average.mse < report.evaluated[b].average.mse;
  });
  json rows = json::array();
  for (auto i : order) {
    const auto& e = report.evaluated[i];
    rows.push_back({{"algorithm", to_string(e.spec.algorithm)},
                    {"parameters", e.spec.describe()},
                    {"mse", e.average.mse},
                    {"r2_adj", e.average.r2_adj ? json(*e.average.r2_adj) : json(nullptr)},
                    {"winner", i == report.winner}});
  }
  json windows = json::array();
  for (const auto& w : report.windows) windows.push_back(to_json(w));
  return {{"facility_id", report.facility_id},
          {"task", to_string(report.task)},
          {"target_month", report.target_month.to_string()},
          {"windows", windows},
          {"rows", rows},
          {"winner", to_json(report.winner_spec())}};
}

// ---------------------------------------------------------------------------
// Service

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const auto j = path.find('/', i);
    const auto end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

const std::string* query(const HttpRequest& r, const std::string& key) {
  auto it = r.query.find(key);
  return it == r.query.end() ? nullptr : &it->second;
}

YearMonth month_param(const HttpRequest& r, const char* key = "month") {
  const auto* v = query(r, key);
  if (!v) fail(ErrorKind::invalid_argument, std::string("query parameter '") + key + "' is required");
  return YearMonth::parse(*v);
}

bool bool_param(const HttpRequest& r, const char* key) {
  const auto* v = query(r, key);
  if (!v) return false;
  auto b = text::parse_bool(*v);
  if (!b) fail(ErrorKind::invalid_argument, std::string("query parameter '") + key + "' must be a boolean");
  return *b;
}

json body_json(const HttpRequest& r) {
  if (r.body.empty()) return json::object();
  json j = parse_json(r.body);
  if (!j.is_object()) fail(ErrorKind::schema, "request body must be a JSON object");
  return j;
}

std::vector<std::int64_t> grid_from_json(const json& g) {
  if (g.is_array()) {
    std::vector<std::int64_t> out;
    for (const auto& v : g) {
      if (!v.is_number_integer()) fail(ErrorKind::schema, "ask_grid entries must be integers");
      out.push_back(v.get<std::int64_t>());
    }
    return out;
  }
  if (g.is_object()) {
    try {
      return ask_grid(g.at("start").get<std::int64_t>(), g.at("stop").get<std::int64_t>(),
                      g.at("step").get<std::int64_t>());
    } catch (const json::exception&) {
      fail(ErrorKind::schema, "ask_grid object needs integer start, stop and step");
    }
  }
  fail(ErrorKind::schema, "ask_grid must be an array or {start, stop, step}");
}

SelectionOptions selection_options(const json& body, unsigned threads) {
  SelectionOptions o;
  o.threads = threads;
  if (body.contains("n_windows")) o.n_windows = body.at("n_windows").get<int>();
  if (body.contains("specs")) {
    for (const auto& s : body.at("specs")) o.specs.push_back(regressor_spec_from_json(s));
  }
  return o;
}

}  // namespace

Service::Service(ServiceConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_now;
  if (config_.data_dir.empty()) {
    store_ = std::make_unique<Store>();
    registry_ = std::make_unique<ModelRegistry>();
    bundles_ = std::make_unique<BundleStore>();
  } else {
    store_ = std::make_unique<Store>(config_.data_dir / "store");
    registry_ = std::make_unique<ModelRegistry>(config_.data_dir / "registry");
    bundles_ = std::make_unique<BundleStore>(config_.data_dir / "bundles");
  }
  for (const auto& f : config_.facilities) store_->upsert_facility(f);
}

Service::~Service() { jobs_.wait_idle(); }

HttpResponse Service::handle(const HttpRequest& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return json_response(http_status(e.kind()), error_payload(e.kind(), e.what()));
  } catch (const json::exception& e) {
    return json_response(400, error_payload(ErrorKind::schema, e.what()));
  } catch (const std::exception& e) {
    return json_response(500, {{"error", {{"kind", "internal"}, {"message", e.what()}}}});
  }
}

HttpResponse Service::route(const HttpRequest& req) {
  const auto parts = split_path(req.path);
  const auto& m = req.method;
  auto method_not_allowed = [] {
    return json_response(405, {{"error", {{"kind", "method_not_allowed"}, {"message", "method not allowed"}}}});
  };

  if (parts.size() == 1 && parts[0] == "health") return json_response(200, {{"status", "ok"}});

  if (parts.size() == 2 && parts[0] == "jobs") {
    if (m != "GET") return method_not_allowed();
    auto job = jobs_.get(parts[1]);
    if (!job) fail(ErrorKind::not_found, "unknown job '" + parts[1] + "'");
    return json_response(200, to_json(*job));
  }

  if (parts.empty() || parts[0] != "facilities") fail(ErrorKind::not_found, "no route for " + req.path);

  if (parts.size() == 1) {
    if (m != "GET") return method_not_allowed();
    json list = json::array();
    for (const auto& f : store_->facilities()) list.push_back(to_json(f));
    return json_response(200, list);
  }

  const std::string& id = parts[1];
  if (parts.size() == 2) {
    if (m == "GET") return json_response(200, to_json(store_->view(id).config()));
    if (m == "PUT") {
      json body = body_json(req);
      if (!body.contains("id")) body["id"] = id;
      auto config = facility_config_from_json(body);
      if (config.id != id) fail(ErrorKind::invalid_argument, "body id does not match the path");
      if (!valid_facility_id(id)) fail(ErrorKind::invalid_argument, "invalid facility id '" + id + "'");
      store_->upsert_facility(config);
      return json_response(200, to_json(config));
    }
    return method_not_allowed();
  }

  // Every route below needs an existing facility.
  const FacilityView view = store_->view(id);
  const std::string& action = parts[2];

  if (action == "data" && parts.size() == 4) {
    if (m != "POST") return method_not_allowed();
    const auto kind = parse_dataset_kind(parts[3]);
    return json_response(200, to_json(store_->ingest(id, kind, std::string_view(req.body))));
  }

  if (parts.size() != 3 && !(action == "offset" && parts.size() == 4 && parts[3] == "recommend")) {
    fail(ErrorKind::not_found, "no route for " + req.path);
  }

  if (action == "gaps") {
    if (m != "GET") return method_not_allowed();
    const auto month = month_param(req);
    json gaps = json::array();
    for (const auto& h : store_->find_gaps(id, month)) gaps.push_back(h.to_string());
    return json_response(200, {{"facility_id", id}, {"month", month.to_string()}, {"gaps", gaps}});
  }

  if (action == "impute") {
    if (m != "POST") return method_not_allowed();
    const auto month = month_param(req);
    auto result = impute_month(view, month);
    store_->write_imputed(id, result.filled);
    return json_response(200, to_json(result));
  }

  if (action == "retrain") {
    if (m != "POST") return method_not_allowed();
    const auto month = month_param(req);
    std::vector<Task> tasks = {Task::occupancy, Task::demand};
    if (const auto* t = query(req, "task")) tasks = {parse_task(*t)};
    const auto options = selection_options(body_json(req), config_.selection_threads);
    const auto start = view.data_start();
    if (!start) fail(ErrorKind::precondition, "facility '" + id + "' has no data");
    make_windows(month, options.n_windows, YearMonth::of(*start));

    std::string detail = "retrain " + month.to_string() + " (";
    for (std::size_t i = 0; i < tasks.size(); ++i) detail += std::string(i ? ", " : "") + to_string(tasks[i]);
    detail += ")";
    const auto job_id = jobs_.submit(JobKind::retrain, id, detail, [this, id, month, tasks, options](JobRecord& job) {
      const FacilityView snapshot = store_->view(id);
      std::vector<ModelRegistryEntry> entries;
      for (Task task : tasks) {
        auto r = retrain(snapshot, month, task, options);
        ModelRegistryEntry e;
        e.facility_id = id;
        e.task = task;
        e.month = month;
        e.created_at = clock_();
        e.model = std::move(r.model);
        e.report = std::move(r.report);
        entries.push_back(std::move(e));
      }
      json out = json::array();
      for (const auto& e : registry_->activate(std::move(entries))) out.push_back(to_json(*e, false));
      job.detail += ": activated";
      return json{{"entries", out}};
    });
    return json_response(202, {{"job_id", job_id}, {"state", "queued"}});
  }

  if (action == "models") {
    if (m != "GET") return method_not_allowed();
    const auto snap = registry_->snapshot();
    std::optional<YearMonth> month;
    if (query(req, "month")) month = month_param(req);
    json list = json::array();
    for (const auto& [key, versions] : snap->versions) {
      if (key.facility_id != id || (month && key.month != *month)) continue;
      const auto active = snap->active.find(key);
      for (const auto& e : versions) {
        json j = to_json(*e, false);
        j["status"] = to_string(active != snap->active.end() && active->second == e ? EntryStatus::active
                                                                                    : EntryStatus::superseded);
        list.push_back(std::move(j));
      }
    }
    return json_response(200, list);
  }

  if (action == "forecast") {
    if (m != "GET") return method_not_allowed();
    const auto month = month_param(req);
    const bool allow_stale = bool_param(req, "allow_stale");
    std::optional<int> horizon;
    if (const auto* h = query(req, "horizon")) {
      auto v = text::parse_int(*h);
      if (!v) fail(ErrorKind::invalid_argument, "horizon must be an integer");
      horizon = static_cast<int>(*v);
    }
    auto pair = registry_->active_pair(id, month, allow_stale);
    if (!pair) {
      fail(ErrorKind::precondition, "no active model pair for '" + id + "' in " + month.to_string() + "; retrain first");
    }
    ForecastOptions opts{allow_stale, clock_()};
    if (!horizon) return json_response(200, to_json(bundles_->put(forecast_month(view, *pair, month, opts))));
    json list = json::array();
    for (const auto& b : forecast_horizon(view, *pair, month, *horizon, opts)) list.push_back(to_json(bundles_->put(b)));
    return json_response(200, {{"bundles", list}});
  }

  if (action == "history") {
    if (m != "GET") return method_not_allowed();
    const auto month = month_param(req);
    const auto bundle = bundles_->get(id, month);
    return json_response(200, to_json(historic_comparison(view, month, bundle ? &*bundle : nullptr)));
  }

  if (action == "whatif") {
    if (m != "POST") return method_not_allowed();
    const json body = body_json(req);
    std::optional<YearMonth> month;
    if (body.contains("month") && !body.at("month").is_null()) month = YearMonth::parse(body.at("month").get<std::string>());
    double forecast = 0.0;
    if (body.contains("forecast_kwh") && !body.at("forecast_kwh").is_null()) {
      forecast = body.at("forecast_kwh").get<double>();
    } else {
      if (!month) fail(ErrorKind::invalid_argument, "give forecast_kwh or a month with a stored forecast");
      auto bundle = bundles_->get(id, *month);
      if (!bundle) fail(ErrorKind::precondition, "no stored forecast for " + month->to_string());
      forecast = bundle->monthly_kwh;
    }
    if (!body.contains("rates")) fail(ErrorKind::schema, "missing field 'rates'");
    if (!body.contains("ask_grid")) fail(ErrorKind::schema, "missing field 'ask_grid'");
    const auto rates = rates_from_json(body.at("rates"));
    const auto grid = grid_from_json(body.at("ask_grid"));
    const double margin = body.value("risk_margin", 0.0);
    return json_response(200, whatif_payload(view.config(), month, forecast, rates, grid, margin));
  }

  if (action == "offset") {
    if (m != "POST") return method_not_allowed();
    const json body = body_json(req);
    auto instance = offset_instance_from_json(body);
    std::optional<double> liability;
    if (body.contains("horizon") && !body.at("horizon").is_null()) {
      const json& h = body.at("horizon");
      const auto start = YearMonth::parse(h.at("start").get<std::string>());
      const auto planned = h.at("planned_green_kwh").get<std::vector<double>>();
      const int months = h.value("months", static_cast<int>(planned.size()));
      if (months < 1 || months > kMaxHorizonMonths) fail(ErrorKind::invalid_argument, "horizon months must be 1..12");
      std::vector<ForecastBundle> bundles;
      for (int k = 0; k < months; ++k) {
        auto b = bundles_->get(id, start + k);
        if (!b) fail(ErrorKind::precondition, "no stored forecast for " + (start + k).to_string());
        bundles.push_back(std::move(*b));
      }
      liability = emissions_liability(bundles, planned, view.config().emission_factor);
      if (instance.mode == OffsetMode::min_cost && !instance.target_offset) instance.target_offset = *liability;
    }
    const auto plan = solve(instance);
    json out = to_json(plan);
    if (liability) out["emissions_liability_mtco2e"] = *liability;
    return json_response(plan.feasible ? 200 : 422, out);
  }

  if (action == "kpi") {
    if (m != "GET") return method_not_allowed();
    return json_response(200, kpi_payload(view, month_param(req, "from"), month_param(req, "to")));
  }

  fail(ErrorKind::not_found, "no route for " + req.path);
}

// ---------------------------------------------------------------------------
// HttpServer

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {
    auto handler = [this](const httplib::Request& in, httplib::Response& out) {
      HttpRequest req;
      req.method = in.method;
      req.path = in.path;
      for (const auto& [k, v] : in.params) req.query.emplace(k, v);
      req.body = in.body;
      const auto resp = service.handle(req);
      out.status = resp.status;
      out.set_content(resp.body, resp.content_type);
    };
    if (service.config().ui_dir) server.set_mount_point("/ui", service.config().ui_dir->string());
    server.Get(R"(/(health|jobs|facilities).*)", handler);
    server.Post(R"(/facilities.*)", handler);
    server.Put(R"(/facilities.*)", handler);
    server.Delete(R"(/.*)", handler);
  }

  Service& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) fail(ErrorKind::precondition, "cannot listen on " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorKind::precondition, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace netzero
