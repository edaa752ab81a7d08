#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "netzero/error.hpp"
#include "netzero/features.hpp"
#include "netzero/modelsel.hpp"
#include "synthetic.hpp"

using namespace netzero;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return x; }

SpecEvaluation evaluation(Algorithm a, double mse, std::optional<double> r2, int n_estimators = 10) {
  SpecEvaluation e;
  e.spec.algorithm = a;
  if (a == Algorithm::random_forest) e.spec.max_features = 0.5;
  else e.spec.learning_rate = 0.1;
  e.spec.n_estimators = n_estimators;
  e.average.mse = mse;
  e.average.r2_adj = r2;
  return e;
}

std::vector<RegressorSpec> small_specs() {
  std::vector<RegressorSpec> out;
  auto rf = grid(Algorithm::random_forest).front();
  auto bt = grid(Algorithm::boosted_trees)[8];
  auto hg = grid(Algorithm::hist_gbm)[10];
  out = {rf, bt, hg};
  return out;
}

const netzero::testing::SyntheticFacility& synthetic() {
  static const auto f = netzero::testing::make_synthetic({.months = 6, .seed = 5});
  return f;
}

}  // namespace

TEST(Windows, AugustTargetUsesJuneAndJuly) {
  const auto w = make_windows(YearMonth(2020, 8));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], (BacktestWindow{YearMonth(2020, 5), YearMonth(2020, 6)}));
  EXPECT_EQ(w[1], (BacktestWindow{YearMonth(2020, 6), YearMonth(2020, 7)}));
}

TEST(Windows, SingleWindowAndStructure) {
  EXPECT_EQ(make_windows(YearMonth(2020, 3), 1),
            (std::vector<BacktestWindow>{{YearMonth(2020, 1), YearMonth(2020, 2)}}));
  for (int n = 1; n <= 6; ++n) {
    const auto w = make_windows(YearMonth(2021, 2), n);
    ASSERT_EQ(w.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(w.back().test_month, YearMonth(2021, 1));
    for (const auto& x : w) EXPECT_EQ(x.test_month, x.train_end + 1);
  }
}

TEST(Windows, InsufficientHistory) {
  try {
    make_windows(YearMonth(2019, 2), 2, YearMonth(2019, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
  EXPECT_NO_THROW(make_windows(YearMonth(2019, 4), 2, YearMonth(2019, 1)));
  EXPECT_THROW(make_windows(YearMonth(2019, 3), 2, YearMonth(2019, 1)), Error);
  EXPECT_THROW(make_windows(YearMonth(2019, 8), 0), Error);
}

TEST(Metrics, MseExamples) {
  EXPECT_EQ(mse(v({3, 4}), v({3, 4})), 0.0);
  EXPECT_NEAR(mse(v({1, 2}), v({2, 2})), 0.5, 1e-12);
  EXPECT_NEAR(mse(v({10}), v({7})), 9.0, 1e-12);
  EXPECT_THROW(mse(v({1}), v({1, 2})), Error);
  EXPECT_THROW(mse(v({}), v({})), Error);
}

TEST(Metrics, MseIsZeroOnlyForEqualVectors) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 3);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> a(1 + rng() % 10), b;
    for (double& x : a) x = n(rng);
    b = a;
    EXPECT_EQ(mse(a, b), 0.0);
    b[rng() % b.size()] += 0.5;
    EXPECT_GT(mse(a, b), 0.0);
  }
}

TEST(Metrics, AdjustedR2Examples) {
  EXPECT_EQ(r2_adjusted(v({1, 2, 3, 4}), v({1, 2, 3, 4}), 1), 1.0);
  EXPECT_EQ(r2_adjusted(v({5, -1, 3, 8, 2, 7}), v({5, -1, 3, 8, 2, 7}), 3), 1.0);

  // Eleven points with SS_res / SS_tot = 0.5 and two features.
  std::vector<double> truth, pred;
  for (int i = 0; i < 11; ++i) truth.push_back(i);  // SS_tot = 110
  pred = truth;
  pred[0] += std::sqrt(55.0);  // SS_res = 55
  EXPECT_NEAR(r2_adjusted(truth, pred, 2), 0.375, 1e-9);

  // Constant predictions far from the mean are worse than the mean.
  EXPECT_LT(r2_adjusted(v({1, 2, 3, 4, 5}), v({9, 9, 9, 9, 9}), 1), 0.0);
  EXPECT_THROW(r2_adjusted(v({2, 2, 2, 2}), v({1, 2, 3, 4}), 1), Error);
  EXPECT_THROW(r2_adjusted(v({1, 2, 3}), v({1, 2, 3}), 2), Error);
}

TEST(Metrics, AdjustedR2InvariantUnderCommonAffineMap) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(10, 4);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> t(8 + rng() % 20), p;
    for (double& x : t) x = n(rng);
    for (double x : t) p.push_back(x + n(rng) - 10);
    const double a = 0.1 + static_cast<double>(rng() % 100) / 7.0, b = n(rng) * 100;
    std::vector<double> ta, pa;
    for (double x : t) ta.push_back(a * x + b);
    for (double x : p) pa.push_back(a * x + b);
    const std::size_t k = 1 + rng() % 3;
    EXPECT_NEAR(r2_adjusted(t, p, k), r2_adjusted(ta, pa, k), 1e-9);
    EXPECT_LE(r2_adjusted(t, p, k), 1.0);
  }
}

TEST(Winner, LowestMseWins) {
  const std::vector<SpecEvaluation> e{evaluation(Algorithm::random_forest, 197.9e-6, -0.22),
                                      evaluation(Algorithm::boosted_trees, 131.9e-6, 0.1),
                                      evaluation(Algorithm::hist_gbm, 101.8e-6, -0.05)};
  EXPECT_EQ(choose_winner(e), 2u);
}

TEST(Winner, TieBreaksOnAdjustedR2ThenAlgorithmOrder) {
  std::vector<SpecEvaluation> e{evaluation(Algorithm::hist_gbm, 1.0, 0.5), evaluation(Algorithm::boosted_trees, 1.0, 0.6)};
  EXPECT_EQ(choose_winner(e), 1u);
  e = {evaluation(Algorithm::hist_gbm, 1.0, 0.5), evaluation(Algorithm::boosted_trees, 1.0, 0.5)};
  EXPECT_EQ(choose_winner(e), 1u);
  e = {evaluation(Algorithm::random_forest, 1.0, std::nullopt), evaluation(Algorithm::hist_gbm, 1.0, -3.0)};
  EXPECT_EQ(choose_winner(e), 1u);
  EXPECT_THROW(choose_winner(std::vector<SpecEvaluation>{}), Error);
}

TEST(Winner, IndependentOfEnumerationOrder) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SpecEvaluation> e;
    const Algorithm algs[] = {Algorithm::random_forest, Algorithm::boosted_trees, Algorithm::hist_gbm};
    for (int i = 0; i < 12; ++i) {
      // Coarse values so that ties in mse and r2 occur.
      e.push_back(evaluation(algs[rng() % 3], std::round(u(rng) * 4) / 4, std::round(u(rng) * 2) / 2,
                             10 + static_cast<int>(rng() % 5)));
    }
    const auto winner = e[choose_winner(e)];
    std::shuffle(e.begin(), e.end(), rng);
    EXPECT_EQ(e[choose_winner(e)], winner);
  }
}

TEST(Selection, SingleSpecWinsAndReportIsComplete) {
  Store s;
  netzero::testing::load_into(s, synthetic());
  SelectionOptions o;
  o.specs = {grid(Algorithm::hist_gbm)[3]};
  const auto r = select_model(s.view("synth"), YearMonth(2019, 6), Task::demand, o);
  EXPECT_EQ(r.winner, 0u);
  EXPECT_EQ(r.winner_spec(), o.specs[0]);
  ASSERT_EQ(r.evaluated.size(), 1u);
  EXPECT_EQ(r.evaluated[0].per_window.size(), 2u);
  EXPECT_EQ(r.windows, make_windows(YearMonth(2019, 6)));
  EXPECT_EQ(r.evaluated[0].average.n_features, demand_schema().size());
}

TEST(Selection, WinnerHasMinimalAverageMse) {
  Store s;
  netzero::testing::load_into(s, synthetic());
  SelectionOptions o;
  o.specs = small_specs();
  for (Task task : {Task::occupancy, Task::demand}) {
    const auto r = select_model(s.view("synth"), YearMonth(2019, 6), task, o);
    ASSERT_EQ(r.evaluated.size(), 3u);
    for (const auto& e : r.evaluated) {
      EXPECT_GE(e.average.mse, r.evaluated[r.winner].average.mse);
      EXPECT_GE(e.average.mse, 0.0);
      ASSERT_EQ(e.per_window.size(), 2u);
      EXPECT_NEAR(e.average.mse, (e.per_window[0].mse + e.per_window[1].mse) / 2.0, 1e-15);
      if (e.average.r2_adj) EXPECT_LE(*e.average.r2_adj, 1.0);
    }
  }
}

TEST(Selection, ThreadCountDoesNotChangeTheReport) {
  Store s;
  netzero::testing::load_into(s, synthetic());
  SelectionOptions a;
  a.specs = small_specs();
  a.threads = 1;
  SelectionOptions b = a;
  b.threads = 3;
  EXPECT_EQ(select_model(s.view("synth"), YearMonth(2019, 6), Task::demand, a),
            select_model(s.view("synth"), YearMonth(2019, 6), Task::demand, b));
}

TEST(Selection, NoReadsPastTheCutoff) {
  Store s;
  netzero::testing::load_into(s, synthetic());
  SelectionOptions o;
  o.specs = small_specs();
  const YearMonth target(2019, 6);
  for (Task task : {Task::occupancy, Task::demand}) {
    AccessLog log;
    const auto r = retrain(s.view("synth", &log), target, task, o);
    ASSERT_FALSE(log.entries().empty());
    EXPECT_LE(*log.latest(), (target - 1).last_day());
    std::size_t staged = 0;
    for (const auto& e : log.entries()) {
      const auto colon = e.stage.find(':');
      if (colon == std::string::npos) continue;
      ++staged;
      const YearMonth bound = YearMonth::parse(e.stage.substr(colon + 1));
      EXPECT_LE(e.last, bound.last_day()) << e.stage << " read " << to_string(e.kind) << " up to " << e.last.to_string();
    }
    EXPECT_GT(staged, 0u);
    EXPECT_GT(log.count(DatasetKind::meter, "train:" + (target - 3).to_string()) +
                  log.count(DatasetKind::swipe, "train:" + (target - 3).to_string()),
              0u);
    EXPECT_EQ(r.model.train_range->last, (target - 1).last_day());
  }
}

TEST(Selection, InsufficientHistoryPropagates) {
  Store s;
  netzero::testing::load_into(s, synthetic());
  SelectionOptions o;
  o.specs = small_specs();
  try {
    select_model(s.view("synth"), YearMonth(2019, 2), Task::demand, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Retrain, RefitsWinnerOnAllDataBeforeTheTarget) {
  Store s;
  netzero::testing::load_into(s, synthetic());
  SelectionOptions o;
  o.specs = small_specs();
  const auto r = retrain(s.view("synth"), YearMonth(2019, 6), Task::occupancy, o);
  EXPECT_EQ(r.model.spec, r.report.winner_spec());
  EXPECT_EQ(r.model.feature_schema, occupancy_schema());
  const auto ts = training_set(s.view("synth"), Task::occupancy, Date::from_ymd(2019, 1, 1), Date::from_ymd(2019, 5, 31));
  auto expected = fit(r.model.spec, ts.x, ts.y);
  expected.train_range = ts.range;
  EXPECT_EQ(r.model, expected);
}
