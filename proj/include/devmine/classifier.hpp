#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "devmine/errors.hpp"
#include "devmine/log.hpp"
#include "devmine/pattern.hpp"

namespace devmine {

/// Traces abstracted as feature-count vectors plus their labels.
struct FeatureVectorDataset {
  std::vector<int> feature_ids;            // column j holds feature_ids[j]
  std::vector<std::vector<double>> rows;   // one row per trace
  std::vector<ClassLabel> labels;
  std::vector<std::string> trace_ids;

  std::size_t arity() const { return feature_ids.size(); }
  std::size_t size() const { return rows.size(); }
};

inline FeatureVectorDataset vectorize(const EventLog& log, const std::vector<Feature>& features) {
  if (features.empty()) throw InvalidArgumentError("vectorize requires a non-empty feature list");
  FeatureVectorDataset data;
  for (const Feature& f : features) data.feature_ids.push_back(f.id);
  const auto traces = encode(log);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const Trace& t = log.traces[i];
    if (!t.label) throw UnlabeledTraceError(t.case_id);
    std::vector<double> row;
    row.reserve(features.size());
    for (const Feature& f : features)
      row.push_back(static_cast<double>(feature_count(f, traces[i])));
    data.rows.push_back(std::move(row));
    data.labels.push_back(*t.label);
    data.trace_ids.push_back(t.case_id);
  }
  return data;
}

struct Prediction {
  ClassLabel label = ClassLabel::normal;
  double deviant_confidence = 0.0;  // in [0, 1], used for AUC ranking
};

struct TreeParams {
  int max_depth = 20;
  int min_samples_split = 2;  // nodes smaller than this become leaves
  double min_gain = 1e-7;     // required Gini impurity decrease
};

/// Binary CART node. Internal nodes route row[feature] <= threshold to the
/// left child; leaves keep their class counts so predictions can expose a
/// deviant fraction.
struct TreeNode {
  bool leaf = true;
  int feature = -1;  // column index into the training dataset
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t n_normal = 0;
  std::size_t n_deviant = 0;
  ClassLabel prediction = ClassLabel::normal;
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<int> feature_ids;
  std::size_t arity = 0;
};

namespace detail {

inline double gini(std::size_t n_normal, std::size_t n_deviant) {
  const double n = static_cast<double>(n_normal + n_deviant);
  if (n == 0.0) return 0.0;
  const double p = static_cast<double>(n_deviant) / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double weighted_gini = std::numeric_limits<double>::infinity();
};

/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values. Tie-break is (weighted gini, feature index, threshold) so row
/// order never influences the tree.
inline Split best_split(const FeatureVectorDataset& data, std::span<const std::size_t> indices) {
  Split best;
  std::vector<std::pair<double, ClassLabel>> column(indices.size());
  for (std::size_t f = 0; f < data.arity(); ++f) {
    for (std::size_t i = 0; i < indices.size(); ++i)
      column[i] = {data.rows[indices[i]][f], data.labels[indices[i]]};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::size_t total_dev = 0;
    for (const auto& [v, l] : column) total_dev += l == ClassLabel::deviant;
    const std::size_t total = column.size();
    std::size_t left_dev = 0;
    for (std::size_t i = 0; i + 1 < total; ++i) {
      left_dev += column[i].second == ClassLabel::deviant;
      if (column[i].first == column[i + 1].first) continue;
      const std::size_t left_n = i + 1;
      const std::size_t right_n = total - left_n;
      const double weighted =
          (static_cast<double>(left_n) * gini(left_n - left_dev, left_dev) +
           static_cast<double>(right_n) * gini(right_n - (total_dev - left_dev), total_dev - left_dev)) /
          static_cast<double>(total);
      const double threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
      if (weighted < best.weighted_gini) {
        best = {true, static_cast<int>(f), threshold, weighted};
      }
    }
  }
  return best;
}

}  // namespace detail

/// Recursive binary splitting on the Gini criterion. Degenerate inputs
/// (single class, too few rows) collapse to a leaf; leaf ties predict
/// deviant.
inline DecisionTreeModel train_decision_tree(const FeatureVectorDataset& data,
                                             const TreeParams& params = {}) {
  DecisionTreeModel model;
  model.feature_ids = data.feature_ids;
  model.arity = data.arity();

  auto make_leaf = [&](std::span<const std::size_t> indices) {
    TreeNode node;
    for (std::size_t i : indices)
      (data.labels[i] == ClassLabel::deviant ? node.n_deviant : node.n_normal)++;
    node.prediction =
        node.n_deviant >= node.n_normal ? ClassLabel::deviant : ClassLabel::normal;
    return node;
  };

  auto build = [&](auto&& self, std::vector<std::size_t> indices, int depth) -> int {
    TreeNode node = make_leaf(indices);
    const int node_index = static_cast<int>(model.nodes.size());
    model.nodes.push_back(node);

    const bool pure = node.n_normal == 0 || node.n_deviant == 0;
    if (pure || depth >= params.max_depth ||
        indices.size() < static_cast<std::size_t>(params.min_samples_split))
      return node_index;

    detail::Split split = detail::best_split(data, indices);
    if (!split.found) return node_index;
    const double gain = detail::gini(node.n_normal, node.n_deviant) - split.weighted_gini;
    if (gain <= params.min_gain) return node_index;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : indices) {
      (data.rows[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left_idx
                                                                                : right_idx)
          .push_back(i);
    }
    model.nodes[node_index].leaf = false;
    model.nodes[node_index].feature = split.feature;
    model.nodes[node_index].threshold = split.threshold;
    const int left = self(self, std::move(left_idx), depth + 1);
    model.nodes[node_index].left = left;
    const int right = self(self, std::move(right_idx), depth + 1);
    model.nodes[node_index].right = right;
    return node_index;
  };

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  if (all.empty()) {
    model.nodes.push_back(TreeNode{});
    return model;
  }
  build(build, std::move(all), 0);
  return model;
}

inline Prediction predict_tree(const DecisionTreeModel& model, std::span<const double> row) {
  if (row.size() != model.arity)
    throw InvalidArgumentError("row arity does not match the model's training arity");
  const TreeNode* node = &model.nodes[0];
  while (!node->leaf) {
    node = row[static_cast<std::size_t>(node->feature)] <= node->threshold
               ? &model.nodes[static_cast<std::size_t>(node->left)]
               : &model.nodes[static_cast<std::size_t>(node->right)];
  }
  const double total = static_cast<double>(node->n_normal + node->n_deviant);
  Prediction p;
  p.label = node->prediction;
  p.deviant_confidence = total > 0 ? static_cast<double>(node->n_deviant) / total : 0.5;
  return p;
}

struct KnnConfig {
  int k = 8;
};

/// Majority vote of the k Euclidean-nearest training rows. Distance ties
/// prefer the lower training index, vote ties go to deviant; the confidence
/// is the deviant fraction among the neighbors.
inline Prediction knn_predict(const FeatureVectorDataset& train, const KnnConfig& config,
                              std::span<const double> row) {
  if (train.size() == 0) throw InvalidArgumentError("knn requires a non-empty training set");
  if (config.k < 1 || static_cast<std::size_t>(config.k) > train.size())
    throw InvalidArgumentError("knn requires 1 <= k <= training size");
  if (row.size() != train.arity())
    throw InvalidArgumentError("row arity does not match the training data");

  std::vector<std::pair<double, std::size_t>> dist(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = train.rows[i][j] - row[j];
      d2 += diff * diff;
    }
    dist[i] = {d2, i};
  }
  std::sort(dist.begin(), dist.end());

  std::size_t deviant_votes = 0;
  for (int i = 0; i < config.k; ++i)
    deviant_votes += train.labels[dist[static_cast<std::size_t>(i)].second] == ClassLabel::deviant;

  Prediction p;
  p.deviant_confidence = static_cast<double>(deviant_votes) / static_cast<double>(config.k);
  p.label = 2 * deviant_votes >= static_cast<std::size_t>(config.k) ? ClassLabel::deviant
                                                                    : ClassLabel::normal;
  return p;
}

}  // namespace devmine
