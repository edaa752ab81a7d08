#include "netzero/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "netzero/error.hpp"
#include "netzero/text.hpp"

namespace netzero {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::random_forest: return "random_forest";
    case Algorithm::boosted_trees: return "boosted_trees";
    case Algorithm::hist_gbm: return "hist_gbm";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::random_forest, Algorithm::boosted_trees, Algorithm::hist_gbm}) {
    if (s == to_string(a)) return a;
  }
  fail(ErrorKind::invalid_argument, "unknown algorithm '" + std::string(s) + "'");
}

void RegressorSpec::validate() const {
  if (n_estimators < 1) fail(ErrorKind::invalid_argument, "n_estimators must be >= 1");
  if (min_samples_leaf < 1) fail(ErrorKind::invalid_argument, "min_samples_leaf must be >= 1");
  if (max_depth < -1) fail(ErrorKind::invalid_argument, "max_depth must be -1 or >= 0");
  switch (algorithm) {
    case Algorithm::random_forest:
      if (!max_features || !(*max_features > 0.0 && *max_features <= 1.0)) {
        fail(ErrorKind::invalid_argument, "random_forest needs max_features in (0, 1]");
      }
      if (learning_rate) fail(ErrorKind::invalid_argument, "random_forest takes no learning_rate");
      break;
    case Algorithm::hist_gbm:
      if (max_bins < 2 || max_bins > 65535) fail(ErrorKind::invalid_argument, "max_bins must lie in [2, 65535]");
      [[fallthrough]];
    case Algorithm::boosted_trees:
      if (!learning_rate || !(*learning_rate > 0.0)) {
        fail(ErrorKind::invalid_argument, std::string(to_string(algorithm)) + " needs learning_rate > 0");
      }
      if (max_features) fail(ErrorKind::invalid_argument, "max_features applies to random_forest only");
      break;
  }
}

int RegressorSpec::effective_max_depth() const {
  if (max_depth != -1) return max_depth;
  return algorithm == Algorithm::random_forest ? -1 : 6;
}

std::string RegressorSpec::describe() const {
  std::string s;
  if (max_features) s += "max features: " + text::format_double(*max_features) + ", ";
  if (learning_rate) s += "learning rate: " + text::format_double(*learning_rate) + ", ";
  s += "n estimators: " + std::to_string(n_estimators) + ", random state: " + std::to_string(random_state);
  return s;
}

void FeatureMatrix::add_row(std::span<const double> row) {
  if (row.size() != schema_.size()) {
    fail(ErrorKind::invalid_argument, "row has " + std::to_string(row.size()) + " values, schema has " +
                                          std::to_string(schema_.size()));
  }
  values_.insert(values_.end(), row.begin(), row.end());
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double TrainedModel::predict_row(std::span<const double> x) const {
  double out = 0.0;
  if (spec.algorithm == Algorithm::random_forest) {
    for (const auto& t : trees) out += t.predict(x);
    out /= static_cast<double>(trees.size());
  } else {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict(x);
    out = base_score + *spec.learning_rate * acc;
  }
  // Stage-wise boosting can step outside the training-target range (an
  // additive fit of an interaction does); predictions are held to it.
  return std::clamp(out, target_min, target_max);
}

namespace {

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return m < b ? m : a;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();

  // Candidates within rounding noise of the incumbent count as ties, which
  // the earlier (lower feature, lower threshold) candidate keeps.
  bool beaten_by(double candidate) const {
    return feature < 0 || candidate > score + 1e-12 * std::abs(score);
  }
};

// Exact-split CART builder over an index sample.
class ExactBuilder {
 public:
  ExactBuilder(const FeatureMatrix& x, std::span<const double> y, const TreeParams& p, std::uint64_t seed)
      : x_(x), y_(y), p_(p), rng_(seed) {}

  RegressionTree build(std::vector<std::size_t> sample) {
    tree_.nodes.clear();
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> idx, int depth) {
    const std::size_t n = idx.size();
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto i : idx) {
      sum += y_[i];
      lo = std::min(lo, y_[i]);
      hi = std::max(hi, y_[i]);
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{.value = sum / static_cast<double>(n)});

    const auto min_leaf = static_cast<std::size_t>(p_.min_samples_leaf);
    if ((p_.max_depth >= 0 && depth >= p_.max_depth) || n < 2 * min_leaf || lo == hi) return id;

    SplitChoice best;
    std::vector<std::size_t> order = idx;
    for (std::size_t f : candidate_features(idx)) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_.at(a, f) < x_.at(b, f); });
      double left = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left += y_[order[k]];
        const double xa = x_.at(order[k], f), xb = x_.at(order[k + 1], f);
        if (xa == xb) continue;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right = sum - left;
        const double score = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr);
        if (best.beaten_by(score)) best = {static_cast<int>(f), midpoint(xa, xb), score};
      }
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> l, r;
    for (auto i : idx) (x_.at(i, static_cast<std::size_t>(best.feature)) <= best.threshold ? l : r).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int li = grow(std::move(l), depth + 1);
    const int ri = grow(std::move(r), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = li;
    node.right = ri;
    return id;
  }

  // Features to search at this node, ascending. With sampling, features are
  // drawn in random order until enough non-constant ones have been seen.
  std::vector<std::size_t> candidate_features(const std::vector<std::size_t>& idx) {
    const std::size_t nf = x_.cols();
    std::vector<std::size_t> out;
    if (p_.features_per_split == 0 || p_.features_per_split >= nf) {
      out.resize(nf);
      std::iota(out.begin(), out.end(), 0);
      return out;
    }
    std::vector<std::size_t> perm(nf);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = nf; i > 1; --i) std::swap(perm[i - 1], perm[rng_() % i]);
    for (std::size_t f : perm) {
      const double first = x_.at(idx.front(), f);
      bool varies = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return x_.at(i, f) != first; });
      if (!varies) continue;
      out.push_back(f);
      if (out.size() == p_.features_per_split) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const FeatureMatrix& x_;
  std::span<const double> y_;
  TreeParams p_;
  std::mt19937_64 rng_;
  RegressionTree tree_;
};

// Feature binning for histogram boosting. Bin b holds values in
// (cuts[b-1], cuts[b]].
struct Binning {
  std::vector<std::vector<double>> cuts;
  std::vector<std::vector<std::uint16_t>> codes;  // [feature][row]
};

std::vector<double> make_cuts(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> distinct = values;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> cuts;
  if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) cuts.push_back(midpoint(distinct[i], distinct[i + 1]));
    return cuts;
  }
  // Equal-frequency cut points over the sample.
  const std::size_t n = values.size();
  for (int q = 1; q < max_bins; ++q) {
    const double v = values[static_cast<std::size_t>(q) * n / static_cast<std::size_t>(max_bins)];
    auto next = std::upper_bound(distinct.begin(), distinct.end(), v);
    if (next == distinct.end()) break;
    const double c = midpoint(v, *next);
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  return cuts;
}

Binning bin_features(const FeatureMatrix& x, int max_bins) {
  Binning b;
  b.cuts.resize(x.cols());
  b.codes.resize(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> col(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x.at(r, f);
    b.cuts[f] = make_cuts(col, max_bins);
    auto& codes = b.codes[f];
    codes.resize(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      codes[r] = static_cast<std::uint16_t>(
          std::lower_bound(b.cuts[f].begin(), b.cuts[f].end(), col[r]) - b.cuts[f].begin());
    }
  }
  return b;
}

class HistBuilder {
 public:
  HistBuilder(const Binning& bins, std::span<const double> g, const TreeParams& p) : bins_(bins), g_(g), p_(p) {}

  RegressionTree build(std::vector<std::size_t> sample) {
    tree_.nodes.clear();
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> idx, int depth) {
    const std::size_t n = idx.size();
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto i : idx) {
      sum += g_[i];
      lo = std::min(lo, g_[i]);
      hi = std::max(hi, g_[i]);
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{.value = sum / static_cast<double>(n)});
    const auto min_leaf = static_cast<std::size_t>(p_.min_samples_leaf);
    if ((p_.max_depth >= 0 && depth >= p_.max_depth) || n < 2 * min_leaf || lo == hi) return id;

    SplitChoice best;
    std::size_t best_bin = 0;
    std::vector<double> hsum;
    std::vector<std::size_t> hcnt;
    for (std::size_t f = 0; f < bins_.cuts.size(); ++f) {
      const std::size_t nb = bins_.cuts[f].size() + 1;
      if (nb < 2) continue;
      hsum.assign(nb, 0.0);
      hcnt.assign(nb, 0);
      const auto& codes = bins_.codes[f];
      for (auto i : idx) {
        hsum[codes[i]] += g_[i];
        ++hcnt[codes[i]];
      }
      double left = 0.0;
      std::size_t nl = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        left += hsum[b];
        nl += hcnt[b];
        if (hcnt[b] == 0 || nl < min_leaf) continue;
        const std::size_t nr = n - nl;
        if (nr < min_leaf || nr == 0) break;
        const double right = sum - left;
        const double score = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr);
        if (best.beaten_by(score)) {
          best = {static_cast<int>(f), bins_.cuts[f][b], score};
          best_bin = b;
        }
      }
    }
    if (best.feature < 0) return id;

    const auto& codes = bins_.codes[static_cast<std::size_t>(best.feature)];
    std::vector<std::size_t> l, r;
    for (auto i : idx) (codes[i] <= best_bin ? l : r).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int li = grow(std::move(l), depth + 1);
    const int ri = grow(std::move(r), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = li;
    node.right = ri;
    return id;
  }

  const Binning& bins_;
  std::span<const double> g_;
  TreeParams p_;
  RegressionTree tree_;
};

void check_inputs(const FeatureMatrix& x, std::span<const double> y) {
  if (x.cols() == 0) fail(ErrorKind::invalid_argument, "feature schema is empty");
  if (x.rows() < 2) fail(ErrorKind::invalid_argument, "need at least 2 samples to fit");
  if (y.size() != x.rows()) fail(ErrorKind::invalid_argument, "targets and rows differ in length");
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double v : x.row(r)) {
      if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "non-finite feature value");
    }
  }
  for (double v : y) {
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "non-finite target");
  }
}

}  // namespace

RegressionTree grow_tree(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> sample,
                         const TreeParams& params, std::uint64_t seed) {
  if (sample.empty()) fail(ErrorKind::invalid_argument, "empty sample");
  ExactBuilder b(x, y, params, seed);
  return b.build(std::vector<std::size_t>(sample.begin(), sample.end()));
}

TrainedModel fit(const RegressorSpec& spec, const FeatureMatrix& x, std::span<const double> y) {
  spec.validate();
  check_inputs(x, y);

  TrainedModel m;
  m.spec = spec;
  m.feature_schema = x.schema();
  m.target_min = *std::min_element(y.begin(), y.end());
  m.target_max = *std::max_element(y.begin(), y.end());

  const std::size_t n = x.rows();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  TreeParams tp;
  tp.max_depth = spec.effective_max_depth();
  tp.min_samples_leaf = spec.min_samples_leaf;

  switch (spec.algorithm) {
    case Algorithm::random_forest: {
      tp.features_per_split = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(*spec.max_features * static_cast<double>(x.cols()) + 1e-9)));
      std::mt19937_64 master(spec.random_state);
      std::vector<std::size_t> sample(n);
      for (int t = 0; t < spec.n_estimators; ++t) {
        const std::uint64_t seed = master();
        std::mt19937_64 boot(seed ^ 0x9e3779b97f4a7c15ULL);
        if (spec.bootstrap) {
          for (auto& s : sample) s = static_cast<std::size_t>(boot() % n);
        } else {
          sample = all;
        }
        m.trees.push_back(grow_tree(x, y, sample, tp, seed));
      }
      break;
    }
    case Algorithm::boosted_trees:
    case Algorithm::hist_gbm: {
      const double lr = *spec.learning_rate;
      m.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
      std::vector<double> f(n, m.base_score), residual(n);
      std::optional<Binning> bins;
      if (spec.algorithm == Algorithm::hist_gbm) bins = bin_features(x, spec.max_bins);
      for (int t = 0; t < spec.n_estimators; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - f[i];
        RegressionTree tree = bins ? HistBuilder(*bins, residual, tp).build(all)
                                   : ExactBuilder(x, residual, tp, 0).build(all);
        for (std::size_t i = 0; i < n; ++i) f[i] += lr * tree.predict(x.row(i));
        m.trees.push_back(std::move(tree));
      }
      break;
    }
  }
  return m;
}

std::vector<double> predict(const TrainedModel& model, const FeatureMatrix& x) {
  if (x.schema() != model.feature_schema) fail(ErrorKind::invalid_argument, "feature schema mismatch");
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = model.predict_row(x.row(r));
  return out;
}

std::vector<RegressorSpec> grid(Algorithm algorithm) {
  std::vector<RegressorSpec> out;
  switch (algorithm) {
    case Algorithm::random_forest:
      for (double mf : {0.5, 0.6}) {
        for (int n : {10, 16, 32, 40, 50}) {
          RegressorSpec s;
          s.algorithm = algorithm;
          s.max_features = mf;
          s.n_estimators = n;
          out.push_back(s);
        }
      }
      break;
    case Algorithm::boosted_trees:
      for (double lr : {0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
        for (int n : {25, 50, 75, 100}) {
          RegressorSpec s;
          s.algorithm = algorithm;
          s.learning_rate = lr;
          s.n_estimators = n;
          out.push_back(s);
        }
      }
      break;
    case Algorithm::hist_gbm:
      for (double lr : {0.01, 0.05, 0.1, 0.15, 0.2}) {
        for (int n : {10, 16, 32, 40, 50}) {
          RegressorSpec s;
          s.algorithm = algorithm;
          s.learning_rate = lr;
          s.n_estimators = n;
          out.push_back(s);
        }
      }
      break;
  }
  return out;
}

std::vector<RegressorSpec> full_grid() {
  std::vector<RegressorSpec> out;
  for (auto a : {Algorithm::random_forest, Algorithm::boosted_trees, Algorithm::hist_gbm}) {
    auto g = grid(a);
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

}  // namespace netzero
