#include "netzero/finance.hpp"

#include <algorithm>
#include <cmath>

#include "netzero/error.hpp"
#include "netzero/text.hpp"

namespace netzero {

void Rates::validate() const {
  if (green_rate <= 0 || conventional_rate <= 0) fail(ErrorKind::invalid_argument, "rates must be positive");
}

InvoiceResult simulate_invoice(const ProcurementScenario& s) {
  s.rates.validate();
  if (s.ask_kwh < 0 || s.consumption_kwh < 0) fail(ErrorKind::invalid_argument, "quantities must be >= 0");
  InvoiceResult r;
  r.green_billed_kwh = s.ask_kwh;
  r.conventional_billed_kwh = std::max<std::int64_t>(0, s.consumption_kwh - s.ask_kwh);
  r.green_consumed_kwh = std::min(s.ask_kwh, s.consumption_kwh);
  r.wasted_green_kwh = std::max<std::int64_t>(0, s.ask_kwh - s.consumption_kwh);
  r.total_cost = r.green_billed_kwh * s.rates.green_rate + r.conventional_billed_kwh * s.rates.conventional_rate;
  r.gp_utilization = s.consumption_kwh == 0
                         ? 1.0
                         : static_cast<double>(r.green_consumed_kwh) / static_cast<double>(s.consumption_kwh);
  return r;
}

std::vector<WhatIfPoint> whatif_curve(std::int64_t consumption_kwh, const Rates& rates,
                                      std::span<const std::int64_t> ask_grid) {
  if (ask_grid.empty()) fail(ErrorKind::invalid_argument, "ask grid is empty");
  for (std::size_t i = 1; i < ask_grid.size(); ++i) {
    if (ask_grid[i] <= ask_grid[i - 1]) fail(ErrorKind::invalid_argument, "ask grid must be strictly ascending");
  }
  std::vector<WhatIfPoint> out;
  out.reserve(ask_grid.size());
  for (auto ask : ask_grid) out.push_back({ask, simulate_invoice({ask, consumption_kwh, rates})});
  return out;
}

std::vector<std::int64_t> ask_grid(std::int64_t start, std::int64_t stop, std::int64_t step) {
  if (step <= 0 || stop < start || start < 0) {
    fail(ErrorKind::invalid_argument, "grid needs 0 <= start <= stop and step > 0");
  }
  if ((stop - start) / step > 1'000'000) fail(ErrorKind::invalid_argument, "grid too large");
  std::vector<std::int64_t> out;
  for (auto a = start; a <= stop; a += step) out.push_back(a);
  return out;
}

AskRecommendation recommend_ask(double forecast_kwh, const Rates& rates, double risk_margin) {
  rates.validate();
  if (!(forecast_kwh >= 0.0)) fail(ErrorKind::invalid_argument, "forecast must be >= 0");
  if (!(risk_margin >= 0.0 && risk_margin < 1.0)) fail(ErrorKind::invalid_argument, "risk margin must lie in [0, 1)");
  AskRecommendation rec;
  if (rates.green_rate <= rates.conventional_rate) {
    rec.ask_kwh = std::llround(forecast_kwh * (1.0 - risk_margin));
    rec.rationale = "green power is not dearer than conventional; cost is minimised and utilisation maximised at "
                    "ask = forecast consumption";
    if (risk_margin > 0.0) rec.rationale += ", reduced by the " + text::format_double(risk_margin * 100) + "% risk margin";
  } else {
    rec.ask_kwh = 0;
    rec.rationale = "green power is dearer than conventional; every green unit ordered raises the invoice";
  }
  return rec;
}

KpiRow kpi_summary(std::span<const KpiRow> rows) {
  if (rows.empty()) fail(ErrorKind::invalid_argument, "kpi_summary needs at least one row");
  KpiRow out;
  out.facility_id = "summary";
  out.period = rows.front().period;
  for (const auto& r : rows) {
    out.gp_utilization_pct += r.gp_utilization_pct;
    out.co2_reduction_mtco2e += r.co2_reduction_mtco2e;
    out.savings_per_unit += r.savings_per_unit;
  }
  const auto n = static_cast<double>(rows.size());
  out.gp_utilization_pct /= n;
  out.savings_per_unit /= n;
  return out;
}

KpiRow kpi_from_invoices(const FacilityId& facility, const std::string& period, std::span<const InvoiceRecord> invoices,
                         double emission_factor) {
  if (invoices.empty()) fail(ErrorKind::precondition, "no invoices for " + facility + " in " + period);
  if (!(emission_factor > 0.0)) fail(ErrorKind::invalid_argument, "emission factor must be > 0");
  std::int64_t consumption = 0, green_consumed = 0;
  Minor cost = 0;
  double conventional_cost_of_all = 0.0;  // minor units
  for (const auto& inv : invoices) {
    ProcurementScenario s{std::llround(inv.green_kwh_billed), std::llround(inv.total_kwh),
                          {inv.green_rate, inv.conventional_rate}};
    const auto r = simulate_invoice(s);
    consumption += s.consumption_kwh;
    green_consumed += r.green_consumed_kwh;
    cost += r.total_cost;
    conventional_cost_of_all += static_cast<double>(s.consumption_kwh) * static_cast<double>(inv.conventional_rate);
  }
  KpiRow row;
  row.facility_id = facility;
  row.period = period;
  row.gp_utilization_pct = consumption == 0 ? 100.0 : 100.0 * static_cast<double>(green_consumed) / static_cast<double>(consumption);
  row.co2_reduction_mtco2e = static_cast<double>(green_consumed) * emission_factor / 1000.0;
  // Savings per unit: conventional rate minus the blended effective rate.
  row.savings_per_unit =
      consumption == 0 ? 0.0 : (conventional_cost_of_all - static_cast<double>(cost)) / static_cast<double>(consumption) / 100.0;
  return row;
}

std::string whatif_csv(std::span<const WhatIfPoint> curve) {
  std::string s = "ask,total_cost,gp_utilization\n";
  for (const auto& p : curve) {
    s += std::to_string(p.ask_kwh) + "," + text::format_minor(p.invoice.total_cost) + "," +
         text::format_double(p.invoice.gp_utilization) + "\n";
  }
  return s;
}

}  // namespace netzero
