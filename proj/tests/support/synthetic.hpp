#pragma once

// Synthetic facility with a known generating process:
//   occupancy  = employees (weekday/holiday/lockdown driven) + visitors
//   daily kWh  = base + per_person * occupancy + cooling(temp) + weekly shape + noise
// spread over 24 hours with a fixed office-hours profile.

#include <cstdint>
#include <map>
#include <string>

#include "netzero/calendar.hpp"
#include "netzero/datastore.hpp"

namespace netzero::testing {

struct SyntheticSpec {
  std::string id = "synth";
  YearMonth first{2019, 1};
  int months = 24;
  std::uint64_t seed = 7;
  double base_kwh = 900.0;
  double per_person_kwh = 4.0;
  double noise_fraction = 0.02;  // sd of multiplicative daily noise
  double green_share = 0.85;     // green ask as a share of invoiced kWh
  bool lockdown = false;         // adds a lockdown stretch in month 10
};

struct SyntheticFacility {
  FacilityConfig config;
  std::string meter_csv, invoice_csv, swipe_csv, weather_csv, calendar_csv;
  std::map<Date, double> true_daily_kwh;
  std::map<YearMonth, double> true_monthly_kwh;
  std::map<Date, double> true_occupancy;
};

SyntheticFacility make_synthetic(const SyntheticSpec& spec);

/// Registers the facility and ingests every CSV. Fails the process loudly if
/// any row is rejected.
void load_into(Store& store, const SyntheticFacility& f);

/// Hourly share of a day's consumption (sums to 1).
double hour_profile(int hour);

}  // namespace netzero::testing
