#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "netzero/error.hpp"
#include "netzero/features.hpp"
#include "netzero/imputation.hpp"
#include "netzero/json_io.hpp"
#include "netzero/offset.hpp"
#include "netzero/service.hpp"
#include "netzero/text.hpp"

namespace netzero::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct Globals {
  bool json = false;
  std::string data_dir;
  std::string config;
};

const CLI::Validator kMonth(
    [](std::string& s) -> std::string {
      try {
        YearMonth::parse(s);
        return {};
      } catch (const Error& e) {
        return e.what();
      }
    },
    "YYYY-MM", "month");

const CLI::Validator kGrid(
    [](std::string& s) -> std::string {
      const auto a = s.find(':');
      const auto b = s.find(':', a == std::string::npos ? a : a + 1);
      if (a == std::string::npos || b == std::string::npos) return "grid must be start:stop:step";
      for (auto part : {s.substr(0, a), s.substr(a + 1, b - a - 1), s.substr(b + 1)}) {
        if (!text::parse_int(part)) return "grid bounds must be integers";
      }
      return {};
    },
    "START:STOP:STEP", "grid");

const CLI::Validator kDecimal(
    [](std::string& s) -> std::string {
      if (!text::parse_minor(s)) return "expected a decimal amount with at most two decimals";
      return {};
    },
    "DECIMAL", "decimal");

ServiceConfig resolve_config(const Globals& g) {
  ServiceConfig c;
  if (!g.config.empty()) {
    c = load_service_config(g.config);
  } else {
    apply_env_overrides(c);
  }
  if (!g.data_dir.empty()) c.data_dir = g.data_dir;
  return c;
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

void print_retrain_table(std::ostream& out, const json& table) {
  out << "facility " << table["facility_id"].get<std::string>() << ", task " << table["task"].get<std::string>()
      << ", target " << table["target_month"].get<std::string>() << "\n";
  out << "windows:";
  for (const auto& w : table["windows"]) {
    out << " (<=" << w["train_end"].get<std::string>() << " -> " << w["test_month"].get<std::string>() << ")";
  }
  out << "\n\n";
  out << pad("Algorithm", 16) << pad("Parameter", 60) << pad("MSE", 14) << "Adj R2\n";
  for (const auto& r : table["rows"]) {
    const std::string r2 = r["r2_adj"].is_null() ? "n/a" : fmt("%.2f", r["r2_adj"].get<double>());
    out << pad(r["algorithm"].get<std::string>(), 16) << pad(r["parameters"].get<std::string>(), 60)
        << pad(fmt("%.4e", r["mse"].get<double>()), 14) << r2 << (r["winner"].get<bool>() ? "  *" : "") << "\n";
  }
}

std::vector<std::int64_t> parse_grid(const std::string& s) {
  const auto a = s.find(':');
  const auto b = s.find(':', a + 1);
  return ask_grid(*text::parse_int(s.substr(0, a)), *text::parse_int(s.substr(a + 1, b - a - 1)),
                  *text::parse_int(s.substr(b + 1)));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"netzero: facility energy forecasting, procurement what-if and offset planning"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Emit machine-readable JSON");
  app.add_option("--data-dir", g.data_dir, "Data directory (store/, registry/, bundles/)");
  app.add_option("--config", g.config, "Service configuration file");

  // facility
  auto* facility = app.add_subcommand("facility", "Register or list facilities");
  facility->require_subcommand(1);
  auto* fac_add = facility->add_subcommand("add", "Register a facility or update its configuration");
  FacilityConfig new_fac;
  fac_add->add_option("id", new_fac.id, "Facility id")->required();
  fac_add->add_option("--name", new_fac.name, "Display name");
  fac_add->add_option("--emission-factor", new_fac.emission_factor, "kgCO2e per kWh");
  fac_add->add_option("--retention-months", new_fac.retention_months, "History kept, in months");
  fac_add->add_option("--currency", new_fac.currency, "Currency code");
  auto* fac_list = facility->add_subcommand("list", "List facilities");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a CSV file into a facility");
  std::string ing_fac, ing_kind, ing_file;
  ingest->add_option("facility", ing_fac)->required();
  ingest->add_option("kind", ing_kind)->required()->check(
      CLI::IsMember({"meter", "invoice", "swipe", "weather", "calendar"}));
  ingest->add_option("file", ing_file)->required()->check(CLI::ExistingFile);

  // impute
  auto* impute = app.add_subcommand("impute", "Fill meter gaps of a month against its invoice");
  std::string imp_fac, imp_month;
  impute->add_option("facility", imp_fac)->required();
  impute->add_option("month", imp_month)->required()->check(kMonth);

  // retrain
  auto* retrain_cmd = app.add_subcommand("retrain", "Select and fit models for a target month");
  std::string rt_fac, rt_month, rt_task;
  int rt_windows = 2;
  unsigned rt_threads = 0;
  retrain_cmd->add_option("facility", rt_fac)->required();
  retrain_cmd->add_option("month", rt_month)->required()->check(kMonth);
  retrain_cmd->add_option("--task", rt_task, "occupancy or demand (default: both)")
      ->check(CLI::IsMember({"occupancy", "demand"}));
  retrain_cmd->add_option("--windows", rt_windows, "Backtest windows")->check(CLI::Range(1, 24));
  retrain_cmd->add_option("--threads", rt_threads, "Worker threads (0: hardware)");

  // forecast
  auto* forecast = app.add_subcommand("forecast", "Forecast daily occupancy and demand");
  std::string fc_fac, fc_month, fc_out;
  int fc_horizon = 1;
  bool fc_stale = false;
  forecast->add_option("facility", fc_fac)->required();
  forecast->add_option("month", fc_month)->required()->check(kMonth);
  forecast->add_option("--horizon", fc_horizon, "Months to forecast")->check(CLI::Range(1, kMaxHorizonMonths));
  forecast->add_option("--out", fc_out, "Write date,occupancy,kwh CSV here");
  forecast->add_flag("--allow-stale", fc_stale, "Use the latest earlier models when none exist for the month");

  // whatif
  auto* whatif = app.add_subcommand("whatif", "Simulate invoices over a range of green-power asks");
  std::string wi_fac, wi_month, wi_green, wi_conv, wi_grid, wi_out;
  std::optional<double> wi_forecast;
  double wi_margin = 0.0;
  whatif->add_option("facility", wi_fac)->required();
  whatif->add_option("--month", wi_month, "Month whose stored forecast is used")->check(kMonth);
  whatif->add_option("--green-rate", wi_green, "Green rate per kWh")->required()->check(kDecimal);
  whatif->add_option("--conv-rate", wi_conv, "Conventional rate per kWh")->required()->check(kDecimal);
  whatif->add_option("--grid", wi_grid, "Ask grid in kWh")->required()->check(kGrid);
  whatif->add_option("--forecast-kwh", wi_forecast, "Consumption to simulate instead of the stored forecast");
  whatif->add_option("--risk-margin", wi_margin, "Fraction held back in the recommendation")->check(CLI::Range(0.0, 0.999999));
  whatif->add_option("--out", wi_out, "Write ask,total_cost,gp_utilization CSV here");

  // offset
  auto* offset = app.add_subcommand("offset", "Solve an offset investment plan");
  std::string off_file, off_mode;
  offset->add_option("--instance", off_file, "Instance JSON file")->required()->check(CLI::ExistingFile);
  offset->add_option("--mode", off_mode, "max or min")->check(CLI::IsMember({"max", "min", "max_offset", "min_cost"}));

  // report kpi
  auto* report = app.add_subcommand("report", "Reports");
  report->require_subcommand(1);
  auto* kpi = report->add_subcommand("kpi", "GP utilisation, CO2 reduction and savings per unit");
  std::string kpi_fac, kpi_from, kpi_to, kpi_rows;
  kpi->add_option("facility", kpi_fac);
  kpi->add_option("--from", kpi_from)->check(kMonth);
  kpi->add_option("--to", kpi_to)->check(kMonth);
  kpi->add_option("--rows", kpi_rows, "Summarise KpiRow JSON instead of invoices")->check(CLI::ExistingFile);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string sv_listen;
  serve->add_option("--listen", sv_listen, "host:port (overrides the config)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (kpi->parsed() && kpi_rows.empty() && (kpi_fac.empty() || kpi_from.empty() || kpi_to.empty())) {
      throw CLI::ValidationError("report kpi", "needs <facility> --from --to, or --rows");
    }
    if (whatif->parsed() && !wi_forecast && wi_month.empty()) {
      throw CLI::ValidationError("whatif", "needs --month (stored forecast) or --forecast-kwh");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (offset->parsed()) {
      auto instance = offset_instance_from_json(parse_json(read_file(off_file)));
      if (!off_mode.empty()) instance.mode = parse_offset_mode(off_mode);
      const auto plan = solve(instance);
      if (g.json) {
        print_json(out, to_json(plan));
      } else if (plan.feasible) {
        out << "mode " << to_string(plan.mode) << "\n";
        for (const auto& a : plan.allocations) {
          out << pad(a.project, 20) << pad(std::to_string(a.units) + " units", 14) << "cost " << a.cost << "\n";
        }
        out << "total offset " << text::format_double(plan.total_offset) << " MTCO2e, total cost " << plan.total_cost
            << "\n";
      }
      if (!plan.feasible) {
        for (const auto& v : plan.violations) err << "infeasible: " << v << "\n";
        return kExitDomain;
      }
      return kExitOk;
    }

    if (kpi->parsed() && !kpi_rows.empty()) {
      const json j = parse_json(read_file(kpi_rows));
      std::vector<KpiRow> rows;
      for (const auto& r : (j.is_array() ? j : j.at("rows"))) rows.push_back(kpi_row_from_json(r));
      const auto summary = kpi_summary(rows);
      if (g.json) {
        json list = json::array();
        for (const auto& r : rows) list.push_back(to_json(r));
        print_json(out, {{"rows", list}, {"summary", to_json(summary)}});
      } else {
        out << fmt("GP utilisation %.2f %%, ", summary.gp_utilization_pct)
            << "CO2 reduction " << text::format_double(summary.co2_reduction_mtco2e) << " MTCO2e, "
            << fmt("savings per unit %.4f\n", summary.savings_per_unit);
      }
      return kExitOk;
    }

    ServiceConfig config = resolve_config(g);
    if (config.data_dir.empty()) config.data_dir = "netzero-data";
    if (serve->parsed() && !sv_listen.empty()) std::tie(config.listen_host, config.listen_port) = parse_listen(sv_listen);
    Service service(config);
    Store& store = service.store();

    if (serve->parsed()) {
      HttpServer server(service);
      const int port = server.start(config.listen_host, config.listen_port);
      err << "listening on " << config.listen_host << ":" << port << ", data in " << config.data_dir.string() << "\n";
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return kExitOk;
    }

    if (fac_add->parsed()) {
      if (!valid_facility_id(new_fac.id)) fail(ErrorKind::invalid_argument, "invalid facility id '" + new_fac.id + "'");
      if (new_fac.name.empty()) new_fac.name = new_fac.id;
      if (store.has_facility(new_fac.id)) {
        auto existing = store.view(new_fac.id).config();
        if (fac_add->count("--name")) existing.name = new_fac.name;
        if (fac_add->count("--emission-factor")) existing.emission_factor = new_fac.emission_factor;
        if (fac_add->count("--retention-months")) existing.retention_months = new_fac.retention_months;
        if (fac_add->count("--currency")) existing.currency = new_fac.currency;
        new_fac = existing;
      }
      store.upsert_facility(new_fac);
      if (g.json) print_json(out, to_json(new_fac));
      else out << "facility " << new_fac.id << " registered\n";
      return kExitOk;
    }

    if (fac_list->parsed()) {
      json list = json::array();
      for (const auto& f : store.facilities()) list.push_back(to_json(f));
      if (g.json) {
        print_json(out, list);
      } else {
        for (const auto& f : store.facilities()) out << f.id << "\t" << f.name << "\n";
      }
      return kExitOk;
    }

    if (ingest->parsed()) {
      std::ifstream in(ing_file, std::ios::binary);
      const auto rep = store.ingest(ing_fac, parse_dataset_kind(ing_kind), in);
      if (g.json) {
        print_json(out, to_json(rep));
      } else {
        out << "accepted " << rep.accepted << ", rejected " << rep.rejected << "\n";
        for (const auto& r : rep.reasons) out << "  line " << r.line << ": " << r.reason << "\n";
      }
      return kExitOk;
    }

    if (impute->parsed()) {
      const auto month = YearMonth::parse(imp_month);
      const auto result = impute_month(store.view(imp_fac), month);
      store.write_imputed(imp_fac, result.filled);
      if (g.json) {
        print_json(out, to_json(result));
      } else {
        out << "imputed " << result.filled.size() << " hours of " << imp_fac << " in " << month.to_string() << "\n"
            << "iterations " << result.iterations << ", final monthly error "
            << fmt("%.3e", result.final_monthly_mse) << "\n"
            << "invoice " << text::format_double(result.invoice_kwh) << " kWh, observed "
            << text::format_double(result.observed_kwh) << " kWh\n";
      }
      return kExitOk;
    }

    if (retrain_cmd->parsed()) {
      const auto month = YearMonth::parse(rt_month);
      std::vector<Task> tasks = {Task::occupancy, Task::demand};
      if (!rt_task.empty()) tasks = {parse_task(rt_task)};
      SelectionOptions opts;
      opts.n_windows = rt_windows;
      opts.threads = rt_threads;
      const FacilityView view = store.view(rt_fac);
      std::vector<ModelRegistryEntry> entries;
      for (Task t : tasks) {
        auto r = retrain(view, month, t, opts);
        ModelRegistryEntry e;
        e.facility_id = rt_fac;
        e.task = t;
        e.month = month;
        e.created_at = service.now();
        e.model = std::move(r.model);
        e.report = std::move(r.report);
        entries.push_back(std::move(e));
      }
      const auto added = service.registry().activate(std::move(entries));
      if (g.json) {
        json list = json::array();
        for (const auto& e : added) list.push_back(to_json(*e, false));
        print_json(out, {{"entries", list}});
      } else {
        for (std::size_t i = 0; i < added.size(); ++i) {
          if (i) out << "\n";
          print_retrain_table(out, retrain_table_payload(added[i]->report));
        }
      }
      return kExitOk;
    }

    if (forecast->parsed()) {
      const auto month = YearMonth::parse(fc_month);
      auto pair = service.registry().active_pair(fc_fac, month, fc_stale);
      if (!pair) fail(ErrorKind::precondition, "no active model pair for '" + fc_fac + "' in " + month.to_string() + "; retrain first");
      ForecastOptions opts{fc_stale, service.now()};
      std::vector<ForecastBundle> bundles;
      const FacilityView view = store.view(fc_fac);
      if (forecast->count("--horizon")) {
        for (const auto& b : forecast_horizon(view, *pair, month, fc_horizon, opts)) bundles.push_back(service.bundles().put(b));
      } else {
        bundles.push_back(service.bundles().put(forecast_month(view, *pair, month, opts)));
      }
      if (!fc_out.empty()) {
        std::string csv = "date,occupancy,kwh\n";
        for (const auto& b : bundles) {
          const auto body = bundle_csv(b);
          csv += body.substr(body.find('\n') + 1);
        }
        write_file_atomic(fc_out, csv);
      }
      if (g.json) {
        if (forecast->count("--horizon")) {
          json list = json::array();
          for (const auto& b : bundles) list.push_back(to_json(b));
          print_json(out, {{"bundles", list}});
        } else {
          print_json(out, to_json(bundles.front()));
        }
      } else {
        for (const auto& b : bundles) {
          out << b.month.to_string() << "  " << fmt("%.1f", b.monthly_kwh) << " kWh  (models selected for "
              << b.models_selected_for.to_string() << ")\n";
        }
      }
      return kExitOk;
    }

    if (whatif->parsed()) {
      const FacilityView view = store.view(wi_fac);
      std::optional<YearMonth> month;
      if (!wi_month.empty()) month = YearMonth::parse(wi_month);
      double forecast_kwh = 0.0;
      if (wi_forecast) {
        forecast_kwh = *wi_forecast;
      } else {
        auto b = service.bundles().get(wi_fac, *month);
        if (!b) fail(ErrorKind::precondition, "no stored forecast for " + month->to_string());
        forecast_kwh = b->monthly_kwh;
      }
      const Rates rates{*text::parse_minor(wi_green), *text::parse_minor(wi_conv)};
      const auto grid = parse_grid(wi_grid);
      const json payload = whatif_payload(view.config(), month, forecast_kwh, rates, grid, wi_margin);
      if (!wi_out.empty()) write_file_atomic(wi_out, whatif_csv(whatif_curve(std::llround(forecast_kwh), rates, grid)));
      if (g.json) {
        print_json(out, payload);
      } else {
        out << "consumption " << payload["consumption_kwh"].get<std::int64_t>() << " kWh\n";
        out << pad("ask", 12) << pad("total_cost", 16) << "gp_utilization\n";
        for (const auto& p : payload["curve"]) {
          out << pad(std::to_string(p["ask_kwh"].get<std::int64_t>()), 12)
              << pad(text::format_minor(p["invoice"]["total_cost"].get<Minor>()), 16)
              << fmt("%.4f", p["invoice"]["gp_utilization"].get<double>()) << "\n";
        }
        out << "recommended ask " << payload["recommendation"]["ask_kwh"].get<std::int64_t>() << " kWh: "
            << payload["recommendation"]["rationale"].get<std::string>() << "\n";
      }
      return kExitOk;
    }

    if (kpi->parsed()) {
      const json payload = kpi_payload(store.view(kpi_fac), YearMonth::parse(kpi_from), YearMonth::parse(kpi_to));
      if (g.json) {
        print_json(out, payload);
      } else {
        out << pad("period", 20) << pad("GP util %", 12) << pad("CO2 MTCO2e", 14) << "savings/unit\n";
        for (const auto& r : payload["rows"]) {
          out << pad(r["period"].get<std::string>(), 20) << pad(fmt("%.2f", r["gp_utilization_pct"].get<double>()), 12)
              << pad(fmt("%.3f", r["co2_reduction_mtco2e"].get<double>()), 14)
              << fmt("%.4f", r["savings_per_unit"].get<double>()) << "\n";
        }
        const auto& s = payload["summary"];
        out << pad("summary", 20) << pad(fmt("%.2f", s["gp_utilization_pct"].get<double>()), 12)
            << pad(fmt("%.3f", s["co2_reduction_mtco2e"].get<double>()), 14)
            << fmt("%.4f", s["savings_per_unit"].get<double>()) << "\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace netzero::cli
