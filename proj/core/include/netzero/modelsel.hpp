#pragma once

// Monthly model selection by sliding-window backtests.
//
// For a target month m every candidate spec is trained on all data up to
// the end of m-k-1 and scored on month m-k, for k = n_windows..1. The spec
// with the lowest average MSE wins.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netzero/calendar.hpp"
#include "netzero/datastore.hpp"
#include "netzero/regress.hpp"

namespace netzero {

enum class Task { occupancy, demand };

const char* to_string(Task t);
Task parse_task(std::string_view s);

struct BacktestWindow {
  YearMonth train_end;  // inclusive
  YearMonth test_month;  // train_end + 1

  bool operator==(const BacktestWindow&) const = default;
};

struct MetricReport {
  double mse = 0.0;
  std::optional<double> r2_adj;  // empty when undefined (too few samples, constant truth)
  std::size_t n_samples = 0;
  std::size_t n_features = 0;

  bool operator==(const MetricReport&) const = default;
};

struct SpecEvaluation {
  RegressorSpec spec;
  MetricReport average;
  std::vector<MetricReport> per_window;

  bool operator==(const SpecEvaluation&) const = default;
};

struct ModelSelectionReport {
  FacilityId facility_id;
  Task task = Task::demand;
  YearMonth target_month;
  std::vector<BacktestWindow> windows;
  std::vector<SpecEvaluation> evaluated;  // in evaluation order
  std::size_t winner = 0;                 // index into evaluated

  const RegressorSpec& winner_spec() const { return evaluated.at(winner).spec; }
  bool operator==(const ModelSelectionReport&) const = default;
};

/// Oldest window first; the newest tests target_month - 1. Throws
/// Error(precondition) when the oldest training cut-off would precede
/// `data_start`.
std::vector<BacktestWindow> make_windows(YearMonth target_month, int n_windows = 2,
                                         std::optional<YearMonth> data_start = std::nullopt);

/// Mean squared residual.
double mse(std::span<const double> truth, std::span<const double> pred);

/// 1 - (1 - R^2)(N - 1)/(N - K - 1). Throws when N <= K + 1 or truth has
/// zero variance.
double r2_adjusted(std::span<const double> truth, std::span<const double> pred, std::size_t k_features);

/// Index of the best evaluation: lowest average MSE, then higher average
/// adjusted R^2 (undefined ranks last), then algorithm order, then the spec's
/// own parameters so the result never depends on enumeration order.
std::size_t choose_winner(std::span<const SpecEvaluation> evaluated);

struct SelectionOptions {
  int n_windows = 2;
  /// Candidate specs; empty means the full default grid.
  std::vector<RegressorSpec> specs;
  /// Worker threads for grid evaluation; 0 means hardware concurrency.
  unsigned threads = 0;
};

/// Backtests every candidate spec and picks the winner. Demand is scored on
/// the relative monthly error of the summed daily prediction against the
/// invoice (metered total when no invoice exists); occupancy on daily
/// counts. Adjusted R^2 is computed on the daily series in both cases.
ModelSelectionReport select_model(const FacilityView& view, YearMonth target_month, Task task,
                                  const SelectionOptions& options = {});

struct RetrainResult {
  ModelSelectionReport report;
  TrainedModel model;  // winner refitted on all data through target_month - 1
};

RetrainResult retrain(const FacilityView& view, YearMonth target_month, Task task,
                      const SelectionOptions& options = {});

/// Training matrix for `task` over [first, last] (complete days only).
struct TrainingSet {
  FeatureMatrix x;
  std::vector<double> y;
  DateRange range;
};
TrainingSet training_set(const FacilityView& view, Task task, Date first, Date last);

}  // namespace netzero
