#include "netzero/imputation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "netzero/error.hpp"
#include "netzero/text.hpp"

namespace netzero {

double relative_squared_error(double estimated, double invoiced) {
  const double rel = (estimated - invoiced) / invoiced;
  return rel * rel;
}

double monthly_mse(std::span<const double> predicted_monthly, std::span<const double> invoice_monthly) {
  if (predicted_monthly.size() != invoice_monthly.size()) {
    fail(ErrorKind::invalid_argument, "monthly_mse: length mismatch");
  }
  if (predicted_monthly.empty()) fail(ErrorKind::invalid_argument, "monthly_mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted_monthly.size(); ++i) {
    if (!(invoice_monthly[i] > 0.0)) fail(ErrorKind::invalid_argument, "monthly_mse: invoice must be > 0");
    sum += relative_squared_error(predicted_monthly[i], invoice_monthly[i]);
  }
  return sum / static_cast<double>(predicted_monthly.size());
}

namespace {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double value() const { return sum / static_cast<double>(n); }
};

}  // namespace

std::vector<double> seed_estimates(const FacilityView& view, std::span<const HourStamp> gaps) {
  if (gaps.empty()) return {};
  const auto& meter = view.raw().meter;
  if (!meter.empty()) {
    view.meter(meter.begin()->first.date(), meter.rbegin()->first.date());
  }

  // dow 0..6, month 1..12, hour 0..23
  std::map<std::array<int, 3>, Mean> by_dow_month_hour;
  std::map<std::array<int, 2>, Mean> by_dow_hour;
  std::array<Mean, 24> by_hour{};
  Mean global;
  for (const auto& [ts, r] : meter) {
    if (r.quality != Quality::observed) continue;
    const Date d = ts.date();
    const int dow = d.weekday();
    const int hour = ts.hour();
    by_dow_month_hour[{dow, static_cast<int>(d.month()), hour}].add(r.kwh);
    by_dow_hour[{dow, hour}].add(r.kwh);
    by_hour[static_cast<std::size_t>(hour)].add(r.kwh);
    global.add(r.kwh);
  }
  if (global.n == 0) fail(ErrorKind::precondition, "no seed basis");

  std::vector<double> seeds;
  seeds.reserve(gaps.size());
  for (HourStamp g : gaps) {
    const Date d = g.date();
    const int dow = d.weekday();
    const int hour = g.hour();
    if (auto it = by_dow_month_hour.find({dow, static_cast<int>(d.month()), hour}); it != by_dow_month_hour.end()) {
      seeds.push_back(it->second.value());
    } else if (auto jt = by_dow_hour.find({dow, hour}); jt != by_dow_hour.end()) {
      seeds.push_back(jt->second.value());
    } else if (by_hour[static_cast<std::size_t>(hour)].n > 0) {
      seeds.push_back(by_hour[static_cast<std::size_t>(hour)].value());
    } else {
      seeds.push_back(global.value());
    }
  }
  return seeds;
}

DescentOutcome descend_to_invoice(double observed_sum, double invoice_total, std::vector<double> seeds,
                                  double threshold, int max_iterations, double convergence_tol) {
  if (!(invoice_total > 0.0)) fail(ErrorKind::invalid_argument, "invoice total must be > 0");
  DescentOutcome out;
  out.values = std::move(seeds);
  for (double& v : out.values) v = std::max(0.0, v);

  auto month_sum = [&] {
    return observed_sum + std::accumulate(out.values.begin(), out.values.end(), 0.0);
  };
  double total = month_sum();
  double e = relative_squared_error(total, invoice_total);
  out.trace.push_back(e);

  const double k = static_cast<double>(out.values.size());
  // eta * de/dx = (T^2 / 2k) * 2 (S - T) / T^2 = (S - T) / k
  while (!out.values.empty() && out.iterations < max_iterations) {
    if (e < threshold && e <= convergence_tol) break;
    const double step = (total - invoice_total) / k;
    bool moved = false;
    for (double& v : out.values) {
      const double next = std::max(0.0, v - step);
      moved = moved || next != v;
      v = next;
    }
    if (!moved) break;
    ++out.iterations;
    total = month_sum();
    e = relative_squared_error(total, invoice_total);
    out.trace.push_back(e);
  }
  out.mse = e;
  out.converged = e < threshold;
  return out;
}

ImputationResult impute_month(const FacilityView& view, YearMonth month, const ImputationOptions& options) {
  const double threshold = options.threshold.value_or(view.config().imputation_mse_threshold);
  const InvoiceRecord* inv = view.invoice(month);
  if (!inv) fail(ErrorKind::precondition, "no invoice for " + month.to_string());
  if (!(inv->total_kwh > 0.0)) fail(ErrorKind::precondition, "invoice total for " + month.to_string() + " is zero");

  std::vector<HourStamp> gaps;
  double observed = 0.0;
  {
    const auto readings = view.meter(month.first_day(), month.last_day());
    std::size_t idx = 0;
    for (HourStamp h : hourly_grid(month)) {
      while (idx < readings.size() && readings[idx].timestamp < h) ++idx;
      if (idx < readings.size() && readings[idx].timestamp == h &&
          readings[idx].quality == Quality::observed) {
        observed += readings[idx].kwh;
      } else {
        gaps.push_back(h);
      }
    }
  }

  ImputationResult result;
  result.facility_id = view.config().id;
  result.month = month;
  result.invoice_kwh = inv->total_kwh;
  result.observed_kwh = observed;

  std::vector<double> seeds = seed_estimates(view, gaps);
  auto outcome = descend_to_invoice(observed, inv->total_kwh, std::move(seeds), threshold,
                                    options.max_iterations, options.convergence_tol);
  if (!outcome.converged) {
    fail(ErrorKind::convergence, "imputation for " + month.to_string() + " did not reach threshold " +
                                     text::format_double(threshold) + " after " +
                                     std::to_string(outcome.iterations) +
                                     " iterations; last monthly mse " + text::format_double(outcome.mse));
  }
  result.iterations = outcome.iterations;
  result.final_monthly_mse = outcome.mse;
  result.mse_trace = std::move(outcome.trace);
  result.filled.reserve(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    result.filled.push_back({gaps[i], outcome.values[i], Quality::imputed});
  }
  return result;
}

}  // namespace netzero
