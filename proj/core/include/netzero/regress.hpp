#pragma once

// Tree-ensemble regressors behind one interface: bagged random forests,
// exact-split gradient boosting and histogram gradient boosting.
//
// All three grow CART trees on squared error. Split search visits features
// in ascending index order and thresholds in ascending order and only takes
// a strictly better candidate, so ties go to the lowest feature index, then
// the lowest threshold.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netzero/calendar.hpp"

namespace netzero {

/// Declaration order is the selection tie-break order.
enum class Algorithm { random_forest, boosted_trees, hist_gbm };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct RegressorSpec {
  Algorithm algorithm = Algorithm::random_forest;
  std::optional<double> max_features;   // random_forest: fraction of features tried per split
  std::optional<double> learning_rate;  // boosted_trees, hist_gbm
  int n_estimators = 10;
  std::uint64_t random_state = 42;

  // Tree settings outside the search grid.
  int max_depth = -1;  // -1: unlimited for forests, 6 for boosting
  int min_samples_leaf = 1;
  int max_bins = 255;   // hist_gbm only
  bool bootstrap = true;  // random_forest only

  void validate() const;
  int effective_max_depth() const;
  /// "max features: 0.5, n estimators: 10, random state: 42"
  std::string describe() const;

  bool operator==(const RegressorSpec&) const = default;
};

/// Row-major feature matrix with a fixed, named column schema.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<std::string> schema) : schema_(std::move(schema)) {}

  void add_row(std::span<const double> row);

  std::size_t rows() const { return schema_.empty() ? 0 : values_.size() / schema_.size(); }
  std::size_t cols() const { return schema_.size(); }
  double at(std::size_t r, std::size_t c) const { return values_[r * schema_.size() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * schema_.size(), schema_.size()};
  }
  const std::vector<std::string>& schema() const { return schema_; }

 private:
  std::vector<std::string> schema_;
  std::vector<double> values_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t leaves() const;
  bool operator==(const RegressionTree&) const = default;
};

struct TrainedModel {
  static constexpr int kFormatVersion = 1;

  RegressorSpec spec;
  std::vector<std::string> feature_schema;
  std::optional<DateRange> train_range;
  double base_score = 0.0;  // boosting initial prediction
  std::vector<RegressionTree> trees;
  double target_min = 0.0;
  double target_max = 0.0;

  double predict_row(std::span<const double> x) const;
  bool operator==(const TrainedModel&) const = default;
};

/// Growth controls for a single CART tree.
struct TreeParams {
  int max_depth = -1;  // -1: unlimited
  int min_samples_leaf = 1;
  /// Number of non-constant features to examine per split; 0 means all.
  std::size_t features_per_split = 0;
};

/// Grows one exact-split CART tree on the rows listed in `sample` (indices
/// may repeat, as in a bootstrap draw). `seed` drives feature sampling.
RegressionTree grow_tree(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> sample,
                         const TreeParams& params, std::uint64_t seed = 0);

/// Errors: fewer than 2 rows, row/target size mismatch, non-finite values.
TrainedModel fit(const RegressorSpec& spec, const FeatureMatrix& x, std::span<const double> y);

/// Errors: schema differs from the one the model was fitted on.
std::vector<double> predict(const TrainedModel& model, const FeatureMatrix& x);

/// Full cross product of the default search grid for one algorithm.
std::vector<RegressorSpec> grid(Algorithm algorithm);
/// Grids of all algorithms, in enum order.
std::vector<RegressorSpec> full_grid();

}  // namespace netzero
