#pragma once

// Gap filling for hourly meter data, anchored to the monthly invoice.
//
// Gaps are seeded from historical bucket means, then moved by gradient
// descent on the relative monthly error e = ((S - T) / T)^2 where S is the
// month's observed plus imputed consumption and T the invoiced total.
// de/dx_j = 2 (S - T) / T^2 is the same for every gap; with the step size
// T^2 / (2k) a single unconstrained step lands exactly on S = T, and
// further steps only matter once the non-negativity clamp bites.

#include <span>
#include <vector>

#include "netzero/calendar.hpp"
#include "netzero/datastore.hpp"

namespace netzero {

struct ImputationOptions {
  /// Success threshold on e; defaults to the facility's configured value.
  std::optional<double> threshold;
  int max_iterations = 10000;
  /// Descent keeps going below the threshold until e reaches this level
  /// (rounding noise) or stops changing.
  double convergence_tol = 1e-24;
};

struct ImputationResult {
  FacilityId facility_id;
  YearMonth month;
  std::vector<MeterReading> filled;  // quality = imputed, one per gap
  int iterations = 0;
  double final_monthly_mse = 0.0;
  std::vector<double> mse_trace;  // e before the first step and after each step
  double invoice_kwh = 0.0;
  double observed_kwh = 0.0;
};

/// Relative squared monthly error ((S - T) / T)^2.
double relative_squared_error(double estimated, double invoiced);

/// Mean of relative squared errors over months. Throws on length mismatch,
/// empty input or a non-positive invoice.
double monthly_mse(std::span<const double> predicted_monthly, std::span<const double> invoice_monthly);

/// Initial estimate for each gap: mean observed kWh of the gap's
/// (weekday, month, hour) bucket, falling back to (weekday, hour), (hour) and
/// finally the global mean. Throws Error(precondition, "no seed basis")
/// without any observed history.
std::vector<double> seed_estimates(const FacilityView& view, std::span<const HourStamp> gaps);

struct DescentOutcome {
  std::vector<double> values;
  int iterations = 0;
  double mse = 0.0;
  std::vector<double> trace;
  bool converged = false;
};

/// Runs the clamped gradient descent for one month. `observed_sum` is fixed;
/// only `seeds` move.
DescentOutcome descend_to_invoice(double observed_sum, double invoice_total, std::vector<double> seeds,
                                  double threshold, int max_iterations, double convergence_tol);

/// Imputes every gap of `month`. Observed readings are never modified.
/// Errors: precondition when the invoice is missing, convergence (message
/// carries the last e) when the threshold is not met.
ImputationResult impute_month(const FacilityView& view, YearMonth month, const ImputationOptions& options = {});

}  // namespace netzero
