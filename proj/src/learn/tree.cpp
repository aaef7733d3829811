#include "perfband/learn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace perfband::learn {

int DecisionTree::leaf_index(std::span<const double> x) const {
  int idx = 0;
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return idx;
}

std::span<const double> DecisionTree::predict_row(std::span<const double> x) const {
  const TreeNode& leaf = nodes[static_cast<std::size_t>(leaf_index(x))];
  return std::span<const double>(leaf.value.data(), leaf.value.size());
}

void DecisionTree::traverse_path(std::span<const double> x, std::vector<int>& path) const {
  path.clear();
  int idx = 0;
  path.push_back(idx);
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    path.push_back(idx);
  }
}

int DecisionTree::max_depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

int resolve_count_param(double value, std::size_t n, int minimum) {
  if (value <= 0.0) throw std::invalid_argument("tree: sample-count parameter must be positive");
  int resolved;
  if (value >= 1.0) {
    resolved = static_cast<int>(value);
  } else {
    resolved = static_cast<int>(std::ceil(value * static_cast<double>(n)));
  }
  return std::max(resolved, minimum);
}

int resolve_max_features(MaxFeatures mf, std::size_t dim) {
  switch (mf) {
    case MaxFeatures::all:
      return static_cast<int>(dim);
    case MaxFeatures::sqrt_of_dim:
      return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(dim)))));
    case MaxFeatures::log2_of_dim:
      return std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(dim)))));
  }
  return static_cast<int>(dim);
}

namespace {

constexpr double kGainEps = 1e-12;

// Weighted class-count statistics for Gini splits.
struct ClsStat {
  std::vector<double> wcounts;
  double wtotal = 0.0;
  std::int64_t n = 0;
};

struct ClsCriterion {
  const std::vector<int>& labels;
  const std::vector<double>& weights;
  int n_classes;

  ClsStat make() const { return ClsStat{std::vector<double>(static_cast<std::size_t>(n_classes), 0.0), 0.0, 0}; }
  void add(ClsStat& s, int row) const {
    s.wcounts[static_cast<std::size_t>(labels[static_cast<std::size_t>(row)])] +=
        weights[static_cast<std::size_t>(row)];
    s.wtotal += weights[static_cast<std::size_t>(row)];
    s.n++;
  }
  static ClsStat minus(const ClsStat& a, const ClsStat& b) {
    ClsStat out = a;
    for (std::size_t k = 0; k < out.wcounts.size(); ++k) out.wcounts[k] -= b.wcounts[k];
    out.wtotal -= b.wtotal;
    out.n -= b.n;
    return out;
  }
  // Gini impurity scaled by the node weight, so gains are additive.
  static double impurity_total(const ClsStat& s) {
    if (s.wtotal <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double w : s.wcounts) sum_sq += w * w;
    return s.wtotal - sum_sq / s.wtotal;
  }
  // impurity_total(minus(parent, left)) without allocating the difference.
  static double impurity_total_minus(const ClsStat& parent, const ClsStat& left) {
    double wtotal = parent.wtotal - left.wtotal;
    if (wtotal <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < parent.wcounts.size(); ++k) {
      double w = parent.wcounts[k] - left.wcounts[k];
      sum_sq += w * w;
    }
    return wtotal - sum_sq / wtotal;
  }
  static std::vector<double> leaf_value(const ClsStat& s) {
    std::vector<double> v(s.wcounts.size(), 0.0);
    if (s.wtotal > 0.0) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = s.wcounts[k] / s.wtotal;
    }
    return v;
  }
};

// Sum / sum-of-squares statistics for variance-reduction splits.
struct RegStat {
  double sum = 0.0;
  double sumsq = 0.0;
  double wtotal = 0.0;
  std::int64_t n = 0;
};

struct RegCriterion {
  const std::vector<double>& targets;

  RegStat make() const { return RegStat{}; }
  void add(RegStat& s, int row) const {
    double y = targets[static_cast<std::size_t>(row)];
    s.sum += y;
    s.sumsq += y * y;
    s.wtotal += 1.0;
    s.n++;
  }
  static RegStat minus(const RegStat& a, const RegStat& b) {
    return RegStat{a.sum - b.sum, a.sumsq - b.sumsq, a.wtotal - b.wtotal, a.n - b.n};
  }
  static double impurity_total(const RegStat& s) {
    if (s.n <= 0) return 0.0;
    double sse = s.sumsq - s.sum * s.sum / static_cast<double>(s.n);
    return std::max(sse, 0.0);
  }
  static double impurity_total_minus(const RegStat& parent, const RegStat& left) {
    return impurity_total(minus(parent, left));
  }
  static std::vector<double> leaf_value(const RegStat& s) {
    return {s.n > 0 ? s.sum / static_cast<double>(s.n) : 0.0};
  }
};

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t left_size = 0;  // rows (not weight) going left after partition
};

template <class Crit>
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const Crit& crit, const TreeParams& params, std::size_t n_rows,
              Rng& rng)
      : X_(X), crit_(crit), params_(params), rng_(rng) {
    min_split_ = resolve_count_param(params.min_samples_split, n_rows, 2);
    min_leaf_ = resolve_count_param(params.min_samples_leaf, n_rows, 1);
    n_features_ = resolve_max_features(params.max_features, X.cols);
    all_features_.resize(X.cols);
    for (std::size_t f = 0; f < X.cols; ++f) all_features_[f] = static_cast<int>(f);
  }

  DecisionTree build(std::vector<int> rows) {
    DecisionTree tree;
    tree.importance.assign(X_.cols, 0.0);
    auto root_stat = stat_of(rows);
    tree.nodes.push_back(make_node(0, root_stat));
    if (params_.max_leaf_nodes > 0) {
      grow_best_first(tree, std::move(rows), root_stat);
    } else {
      grow_depth_first(tree, 0, std::move(rows), root_stat);
    }
    return tree;
  }

 private:
  using Stat = decltype(std::declval<Crit>().make());

  Stat stat_of(const std::vector<int>& rows) const {
    Stat s = crit_.make();
    for (int r : rows) crit_.add(s, r);
    return s;
  }

  TreeNode make_node(int depth, const Stat& s) const {
    TreeNode n;
    n.depth = depth;
    n.count = s.n;
    n.weight = s.wtotal;
    n.value = Crit::leaf_value(s);
    return n;
  }

  bool splittable(int depth, const Stat& s) const {
    if (params_.max_depth > 0 && depth >= params_.max_depth) return false;
    if (s.n < min_split_) return false;
    return Crit::impurity_total(s) > kGainEps;
  }

  // Candidate features for one split: a uniform subset of size n_features_,
  // scanned in ascending index order so gain ties resolve to the lowest
  // feature index.
  std::vector<int> sample_features() {
    if (n_features_ >= static_cast<int>(X_.cols)) return all_features_;
    std::vector<int> pool = all_features_;
    for (int i = 0; i < n_features_; ++i) {
      std::size_t j = i + rng_.uniform_index(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(n_features_));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  SplitChoice find_split(const std::vector<int>& rows, const Stat& parent) {
    SplitChoice best;
    double parent_impurity = Crit::impurity_total(parent);
    std::vector<int> features = sample_features();
    auto& order = scratch_order_;
    for (int f : features) {
      order.clear();
      for (int r : rows)
        order.emplace_back(X_.at(static_cast<std::size_t>(r), static_cast<std::size_t>(f)), r);
      std::sort(order.begin(), order.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (order.front().first == order.back().first) continue;

      Stat left = crit_.make();
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        crit_.add(left, order[i].second);
        if (order[i + 1].first <= order[i].first) continue;
        std::int64_t n_left = static_cast<std::int64_t>(i) + 1;
        std::int64_t n_right = static_cast<std::int64_t>(order.size()) - n_left;
        if (n_left < min_leaf_ || n_right < min_leaf_) continue;
        double gain = parent_impurity - Crit::impurity_total(left) -
                      Crit::impurity_total_minus(parent, left);
        if (gain > best.gain + kGainEps) {
          // Midpoints of adjacent representable doubles can round up to the
          // right value; fall back to the left value so the partition stays
          // nonempty on both sides.
          double threshold = (order[i].first + order[i + 1].first) / 2.0;
          if (threshold >= order[i + 1].first) threshold = order[i].first;
          best.found = true;
          best.feature = f;
          best.threshold = threshold;
          best.gain = gain;
          best.left_size = static_cast<std::size_t>(n_left);
        }
      }
    }
    return best;
  }

  std::pair<std::vector<int>, std::vector<int>> partition(const std::vector<int>& rows,
                                                          const SplitChoice& split) const {
    std::vector<int> left, right;
    left.reserve(split.left_size);
    right.reserve(rows.size() - split.left_size);
    for (int r : rows) {
      double v = X_.at(static_cast<std::size_t>(r), static_cast<std::size_t>(split.feature));
      (v <= split.threshold ? left : right).push_back(r);
    }
    return {std::move(left), std::move(right)};
  }

  void apply_split(DecisionTree& tree, int node_idx, const SplitChoice& split,
                   const Stat& left_stat, const Stat& right_stat) {
    int left_idx = static_cast<int>(tree.nodes.size());
    int depth = tree.nodes[static_cast<std::size_t>(node_idx)].depth;
    tree.nodes.push_back(make_node(depth + 1, left_stat));
    tree.nodes.push_back(make_node(depth + 1, right_stat));
    TreeNode& n = tree.nodes[static_cast<std::size_t>(node_idx)];
    n.feature = split.feature;
    n.threshold = split.threshold;
    n.left = left_idx;
    n.right = left_idx + 1;
    n.value.clear();
    tree.importance[static_cast<std::size_t>(split.feature)] += split.gain;
  }

  void grow_depth_first(DecisionTree& tree, int node_idx, std::vector<int> rows, Stat stat) {
    if (!splittable(tree.nodes[static_cast<std::size_t>(node_idx)].depth, stat)) return;
    SplitChoice split = find_split(rows, stat);
    if (!split.found) return;
    auto [left_rows, right_rows] = partition(rows, split);
    rows.clear();
    rows.shrink_to_fit();
    Stat left_stat = stat_of(left_rows);
    Stat right_stat = Crit::minus(stat, left_stat);
    apply_split(tree, node_idx, split, left_stat, right_stat);
    int left_idx = tree.nodes[static_cast<std::size_t>(node_idx)].left;
    int right_idx = tree.nodes[static_cast<std::size_t>(node_idx)].right;
    grow_depth_first(tree, left_idx, std::move(left_rows), std::move(left_stat));
    grow_depth_first(tree, right_idx, std::move(right_rows), std::move(right_stat));
  }

  struct Pending {
    double gain;
    std::uint64_t order;  // insertion counter; ties pop in FIFO order
    int node_idx;
    SplitChoice split;
    std::vector<int> rows;
    Stat stat;
  };
  struct PendingLess {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.gain != b.gain) return a.gain < b.gain;
      return a.order > b.order;
    }
  };

  void grow_best_first(DecisionTree& tree, std::vector<int> rows, Stat root_stat) {
    std::priority_queue<Pending, std::vector<Pending>, PendingLess> queue;
    std::uint64_t counter = 0;
    auto enqueue = [&](int node_idx, std::vector<int>&& node_rows, Stat&& stat) {
      if (!splittable(tree.nodes[static_cast<std::size_t>(node_idx)].depth, stat)) return;
      SplitChoice split = find_split(node_rows, stat);
      if (!split.found) return;
      queue.push(Pending{split.gain, counter++, node_idx, split, std::move(node_rows),
                         std::move(stat)});
    };
    enqueue(0, std::move(rows), std::move(root_stat));
    int leaves = 1;
    while (!queue.empty() && leaves < params_.max_leaf_nodes) {
      Pending top = std::move(const_cast<Pending&>(queue.top()));
      queue.pop();
      auto [left_rows, right_rows] = partition(top.rows, top.split);
      Stat left_stat = stat_of(left_rows);
      Stat right_stat = Crit::minus(top.stat, left_stat);
      apply_split(tree, top.node_idx, top.split, left_stat, right_stat);
      leaves++;
      int left_idx = tree.nodes[static_cast<std::size_t>(top.node_idx)].left;
      int right_idx = tree.nodes[static_cast<std::size_t>(top.node_idx)].right;
      enqueue(left_idx, std::move(left_rows), std::move(left_stat));
      enqueue(right_idx, std::move(right_rows), std::move(right_stat));
    }
  }

  const Matrix& X_;
  const Crit& crit_;
  const TreeParams& params_;
  Rng& rng_;
  int min_split_ = 2;
  int min_leaf_ = 1;
  int n_features_ = 0;
  std::vector<int> all_features_;
  std::vector<std::pair<double, int>> scratch_order_;
};

}  // namespace

DecisionTree fit_classification_tree(const Matrix& X, const std::vector<int>& labels,
                                     const std::vector<double>& weights, int n_classes,
                                     const std::vector<int>& rows, const TreeParams& params,
                                     Rng& rng) {
  if (rows.empty()) throw std::invalid_argument("fit_classification_tree: no rows");
  if (n_classes < 2) throw std::invalid_argument("fit_classification_tree: need >= 2 classes");
  ClsCriterion crit{labels, weights, n_classes};
  TreeBuilder<ClsCriterion> builder(X, crit, params, rows.size(), rng);
  return builder.build(rows);
}

DecisionTree fit_regression_tree(const Matrix& X, const std::vector<double>& targets,
                                 const std::vector<int>& rows, const TreeParams& params,
                                 Rng& rng) {
  if (rows.empty()) throw std::invalid_argument("fit_regression_tree: no rows");
  RegCriterion crit{targets};
  TreeBuilder<RegCriterion> builder(X, crit, params, rows.size(), rng);
  return builder.build(rows);
}

}  // namespace perfband::learn
