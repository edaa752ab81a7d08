#include "netzero/modelsel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "netzero/error.hpp"
#include "netzero/features.hpp"
#include "netzero/imputation.hpp"

namespace netzero {

const char* to_string(Task t) { return t == Task::occupancy ? "occupancy" : "demand"; }

Task parse_task(std::string_view s) {
  if (s == "occupancy") return Task::occupancy;
  if (s == "demand") return Task::demand;
  fail(ErrorKind::invalid_argument, "unknown task '" + std::string(s) + "'");
}

std::vector<BacktestWindow> make_windows(YearMonth target_month, int n_windows, std::optional<YearMonth> data_start) {
  if (n_windows < 1) fail(ErrorKind::invalid_argument, "n_windows must be >= 1");
  if (data_start && target_month - *data_start < n_windows + 1) {
    fail(ErrorKind::precondition, "insufficient history: " + target_month.to_string() + " needs " +
                                      std::to_string(n_windows + 1) + " months of data before it, data starts " +
                                      data_start->to_string());
  }
  std::vector<BacktestWindow> out;
  for (int k = n_windows; k >= 1; --k) {
    const YearMonth test = target_month - k;
    out.push_back({test - 1, test});
  }
  return out;
}

double mse(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) fail(ErrorKind::invalid_argument, "mse: length mismatch");
  if (truth.empty()) fail(ErrorKind::invalid_argument, "mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double r = truth[i] - pred[i];
    sum += r * r;
  }
  return sum / static_cast<double>(truth.size());
}

double r2_adjusted(std::span<const double> truth, std::span<const double> pred, std::size_t k_features) {
  if (truth.size() != pred.size()) fail(ErrorKind::invalid_argument, "r2_adjusted: length mismatch");
  const std::size_t n = truth.size();
  if (n <= k_features + 1) {
    fail(ErrorKind::invalid_argument, "r2_adjusted: need N > K + 1 (N=" + std::to_string(n) +
                                          ", K=" + std::to_string(k_features) + ")");
  }
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(n);
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  }
  if (ss_tot == 0.0) fail(ErrorKind::invalid_argument, "r2_adjusted: truth has zero variance");
  const double r2 = 1.0 - ss_res / ss_tot;
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - k_features - 1);
}

namespace {

// Strict weak ordering: true when a ranks ahead of b.
bool ranks_ahead(const SpecEvaluation& a, const SpecEvaluation& b) {
  if (a.average.mse != b.average.mse) return a.average.mse < b.average.mse;
  const double ra = a.average.r2_adj.value_or(-std::numeric_limits<double>::infinity());
  const double rb = b.average.r2_adj.value_or(-std::numeric_limits<double>::infinity());
  if (ra != rb) return ra > rb;
  if (a.spec.algorithm != b.spec.algorithm) return a.spec.algorithm < b.spec.algorithm;
  auto key = [](const RegressorSpec& s) {
    return std::make_tuple(s.max_features.value_or(0.0), s.learning_rate.value_or(0.0), s.n_estimators,
                           s.random_state, s.max_depth, s.min_samples_leaf, s.max_bins, s.bootstrap);
  };
  return key(a.spec) < key(b.spec);
}

std::optional<double> r2_or_empty(std::span<const double> truth, std::span<const double> pred, std::size_t k) {
  try {
    return r2_adjusted(truth, pred, k);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Everything one backtest window needs, prepared once and shared by specs.
struct PreparedWindow {
  TrainingSet train;
  FeatureMatrix test_x;
  std::vector<double> daily_truth;       // truth per test row (may be partial for demand)
  std::vector<std::size_t> truth_rows;   // rows of test_x with a daily truth
  double monthly_truth = 0.0;            // demand only
};

PreparedWindow prepare(const FacilityView& view, Task task, Date data_start, const BacktestWindow& w) {
  PreparedWindow p;
  view.stage("train:" + w.train_end.to_string());
  p.train = training_set(view, task, data_start, w.train_end.last_day());
  view.stage("test:" + w.test_month.to_string());
  const DateRange test = DateRange::of(w.test_month);
  if (task == Task::occupancy) {
    auto rows = occupancy_training_rows(view, test.first, test.last);
    if (rows.empty()) fail(ErrorKind::precondition, "no occupancy ground truth in " + w.test_month.to_string());
    p.test_x = to_matrix(std::span<const OccupancyFeatureRow>(rows));
    p.daily_truth = targets(std::span<const OccupancyFeatureRow>(rows));
    p.truth_rows.resize(rows.size());
    std::iota(p.truth_rows.begin(), p.truth_rows.end(), 0);
    return p;
  }

  // Demand rows are built the way inference builds them at the start of the
  // test month, with the recorded occupancy standing in for the forecast.
  std::map<Date, double> occupancy;
  for (Date d : test.dates()) {
    const SwipeRecord* sw = view.swipe(d);
    if (!sw) fail(ErrorKind::precondition, "no swipe record for backtest day " + d.to_string());
    occupancy[d] = static_cast<double>(sw->employee_swipes + sw->visitor_count);
  }
  auto rows = build_demand_rows(view, test, OccupancySource::forecast, &occupancy);
  p.test_x = to_matrix(std::span<const DemandFeatureRow>(rows));
  double metered = 0.0;
  bool complete = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (auto kwh = view.daily_kwh(rows[i].date)) {
      p.daily_truth.push_back(*kwh);
      p.truth_rows.push_back(i);
      metered += *kwh;
    } else {
      complete = false;
    }
  }
  const InvoiceRecord* inv = view.invoice(w.test_month);
  if (inv && inv->total_kwh > 0.0) {
    p.monthly_truth = inv->total_kwh;
  } else if (complete && metered > 0.0) {
    p.monthly_truth = metered;
  } else {
    fail(ErrorKind::precondition, "no monthly ground truth for " + w.test_month.to_string());
  }
  return p;
}

MetricReport score(Task task, const PreparedWindow& p, const std::vector<double>& pred) {
  MetricReport m;
  m.n_features = p.test_x.cols();
  std::vector<double> daily_pred;
  daily_pred.reserve(p.truth_rows.size());
  for (auto r : p.truth_rows) daily_pred.push_back(pred[r]);
  if (task == Task::occupancy) {
    m.mse = mse(p.daily_truth, daily_pred);
  } else {
    const double total = std::accumulate(pred.begin(), pred.end(), 0.0);
    m.mse = relative_squared_error(total, p.monthly_truth);
  }
  m.n_samples = p.daily_truth.size();
  m.r2_adj = r2_or_empty(p.daily_truth, daily_pred, m.n_features);
  return m;
}

MetricReport average(const std::vector<MetricReport>& reports) {
  MetricReport avg;
  double r2_sum = 0.0;
  bool r2_all = true;
  for (const auto& r : reports) {
    avg.mse += r.mse;
    avg.n_samples += r.n_samples;
    avg.n_features = r.n_features;
    if (r.r2_adj) r2_sum += *r.r2_adj;
    else r2_all = false;
  }
  const auto n = static_cast<double>(reports.size());
  avg.mse /= n;
  if (r2_all && !reports.empty()) avg.r2_adj = r2_sum / n;
  return avg;
}

Date require_data_start(const FacilityView& view) {
  auto start = view.data_start();
  if (!start) fail(ErrorKind::precondition, "facility '" + view.config().id + "' has no data");
  return *start;
}

}  // namespace

std::size_t choose_winner(std::span<const SpecEvaluation> evaluated) {
  if (evaluated.empty()) fail(ErrorKind::invalid_argument, "no evaluated specs");
  std::size_t best = 0;
  for (std::size_t i = 1; i < evaluated.size(); ++i) {
    if (ranks_ahead(evaluated[i], evaluated[best])) best = i;
  }
  return best;
}

TrainingSet training_set(const FacilityView& view, Task task, Date first, Date last) {
  TrainingSet ts;
  if (task == Task::occupancy) {
    auto rows = occupancy_training_rows(view, first, last);
    ts.x = to_matrix(std::span<const OccupancyFeatureRow>(rows));
    ts.y = targets(std::span<const OccupancyFeatureRow>(rows));
    ts.range = rows.empty() ? DateRange{first, last} : DateRange{rows.front().date, rows.back().date};
  } else {
    auto rows = demand_training_rows(view, first, last);
    ts.x = to_matrix(std::span<const DemandFeatureRow>(rows));
    ts.y = targets(std::span<const DemandFeatureRow>(rows));
    ts.range = rows.empty() ? DateRange{first, last} : DateRange{rows.front().date, rows.back().date};
  }
  if (ts.y.size() < 2) {
    fail(ErrorKind::precondition, std::string("not enough complete ") + to_string(task) + " training days up to " +
                                      last.to_string());
  }
  return ts;
}

ModelSelectionReport select_model(const FacilityView& view, YearMonth target_month, Task task,
                                  const SelectionOptions& options) {
  const Date start = require_data_start(view);
  ModelSelectionReport report;
  report.facility_id = view.config().id;
  report.task = task;
  report.target_month = target_month;
  report.windows = make_windows(target_month, options.n_windows, YearMonth::of(start));

  std::vector<PreparedWindow> prepared;
  for (const auto& w : report.windows) prepared.push_back(prepare(view, task, start, w));
  view.stage("");

  const std::vector<RegressorSpec> specs = options.specs.empty() ? full_grid() : options.specs;
  report.evaluated.resize(specs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        SpecEvaluation ev;
        ev.spec = specs[i];
        for (const auto& p : prepared) {
          TrainedModel m = fit(specs[i], p.train.x, p.train.y);
          ev.per_window.push_back(score(task, p, predict(m, p.test_x)));
        }
        ev.average = average(ev.per_window);
        report.evaluated[i] = std::move(ev);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(specs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  report.winner = choose_winner(report.evaluated);
  return report;
}

RetrainResult retrain(const FacilityView& view, YearMonth target_month, Task task, const SelectionOptions& options) {
  RetrainResult out;
  out.report = select_model(view, target_month, task, options);
  const Date start = require_data_start(view);
  view.stage("refit:" + (target_month - 1).to_string());
  TrainingSet ts = training_set(view, task, start, (target_month - 1).last_day());
  view.stage("");
  out.model = fit(out.report.winner_spec(), ts.x, ts.y);
  out.model.train_range = ts.range;
  return out;
}

}  // namespace netzero
