#pragma once

// Green-power invoice simulation and procurement KPIs.
//
// Billing rule: the green-power ask is billed in full at the green rate;
// consumption beyond the ask is billed at the conventional rate.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netzero/datastore.hpp"

namespace netzero {

struct Rates {
  Minor green_rate = 0;         // minor units per kWh
  Minor conventional_rate = 0;  // minor units per kWh

  void validate() const;
  bool operator==(const Rates&) const = default;
};

struct ProcurementScenario {
  std::int64_t ask_kwh = 0;
  std::int64_t consumption_kwh = 0;
  Rates rates;
};

struct InvoiceResult {
  Minor total_cost = 0;
  std::int64_t green_billed_kwh = 0;
  std::int64_t conventional_billed_kwh = 0;
  std::int64_t green_consumed_kwh = 0;
  std::int64_t wasted_green_kwh = 0;
  double gp_utilization = 0.0;  // fraction of consumption served by green power

  bool operator==(const InvoiceResult&) const = default;
};

struct WhatIfPoint {
  std::int64_t ask_kwh = 0;
  InvoiceResult invoice;
};

struct AskRecommendation {
  std::int64_t ask_kwh = 0;
  std::string rationale;
};

struct KpiRow {
  FacilityId facility_id;
  std::string period;
  double gp_utilization_pct = 0.0;
  double co2_reduction_mtco2e = 0.0;
  double savings_per_unit = 0.0;  // currency (major units) per kWh
};

/// Throws Error(invalid_argument) on negative quantities or non-positive rates.
InvoiceResult simulate_invoice(const ProcurementScenario& s);

/// Errors: empty or non-ascending grid.
std::vector<WhatIfPoint> whatif_curve(std::int64_t consumption_kwh, const Rates& rates,
                                      std::span<const std::int64_t> ask_grid);

/// Inclusive start:stop:step grid.
std::vector<std::int64_t> ask_grid(std::int64_t start, std::int64_t stop, std::int64_t step);

/// forecast * (1 - margin) rounded to whole kWh when green power is not
/// dearer than conventional, else 0.
AskRecommendation recommend_ask(double forecast_kwh, const Rates& rates, double risk_margin = 0.0);

/// Utilisation and savings averaged across rows, CO2 summed.
KpiRow kpi_summary(std::span<const KpiRow> rows);

/// KPI row for one facility over the given invoices. Invoice kWh are
/// rounded to whole units for billing; CO2 uses the green kWh consumed.
KpiRow kpi_from_invoices(const FacilityId& facility, const std::string& period,
                         std::span<const InvoiceRecord> invoices, double emission_factor);

/// CSV export: ask,total_cost,gp_utilization
std::string whatif_csv(std::span<const WhatIfPoint> curve);

}  // namespace netzero
