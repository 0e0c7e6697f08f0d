// Copyright 2026 The botscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// @file gbm.hpp
/// Binary gradient boosting with exponential loss L(y, F) = exp(-y F),
/// y in {-1, +1}, over depth-limited regression trees.
///
/// Each round fits a tree to the pseudo-residuals r = y exp(-y F) with
/// weights w = exp(-y F). Splits maximize the weighted least-squares
/// reduction G_L^2/H_L + G_R^2/H_R - G^2/H (G = sum r, H = sum w) and leaves
/// take one Newton step G/H, clamped to [-4, 4]. The model margin is
///   F(x) = F0 + learning_rate * sum_m tree_m(x),   F0 = 0.5 ln(p+/p-).

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/features.hpp"
#include "json.hpp"

namespace botscreen {

inline constexpr double kExpClamp = 30.0;
inline constexpr double kLeafClamp = 4.0;

/// Exponential loss exp(-y F) with the exponent clamped to [-30, 30].
inline double exponential_loss(int y, double margin) {
  return std::exp(std::clamp(-double(y) * margin, -kExpClamp, kExpClamp));
}

/// Negative gradient of the exponential loss with respect to the margin.
inline double neg_gradient(int y, double margin) {
  return double(y) * exponential_loss(y, margin);
}

struct TreeParams {
  int max_depth = 3;
  std::size_t min_samples_leaf = 1;
};

struct GbmConfig {
  std::size_t n_estimators = 200;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;

  TreeParams tree() const { return {max_depth, min_samples_leaf}; }

  void validate() const {
    if (n_estimators < 1) throw UsageError("n_estimators must be >= 1");
    if (!(learning_rate > 0)) throw UsageError("learning_rate must be > 0");
    if (max_depth < 1) throw UsageError("max_depth must be >= 1");
    if (min_samples_leaf < 1) throw UsageError("min_samples_leaf must be >= 1");
  }

  friend bool operator==(const GbmConfig&, const GbmConfig&) = default;
};

/// Binary regression tree. Node 0 is the root; an internal node sends x left
/// iff x[feature] <= threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  static RegressionTree leaf(double value) { return RegressionTree({Node{-1, 0.0, -1, -1, value}}); }

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const Node& n = nodes_[i];
      i = std::size_t(x[std::size_t(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const { return depth_from(0); }

  /// Throws DataError unless every internal node has two valid children, a
  /// feature index below `features` and a finite threshold.
  void validate(std::size_t features) const {
    if (nodes_.empty()) throw DataError("tree has no nodes");
    for (const auto& n : nodes_) {
      if (n.is_leaf()) {
        if (!std::isfinite(n.value)) throw DataError("tree leaf value is not finite");
        continue;
      }
      auto valid = [&](int child) { return child > 0 && std::size_t(child) < nodes_.size(); };
      if (!valid(n.left) || !valid(n.right)) throw DataError("tree node has a missing child");
      if (std::size_t(n.feature) >= features) throw DataError("tree feature index out of range");
      if (!std::isfinite(n.threshold)) throw DataError("tree threshold is not finite");
    }
  }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::size_t depth_from(std::size_t i) const {
    if (nodes_[i].is_leaf()) return 0;
    return 1 + std::max(depth_from(std::size_t(nodes_[i].left)),
                        depth_from(std::size_t(nodes_[i].right)));
  }

  std::vector<Node> nodes_;
};

/// Row indices of each column sorted by (value, row). Computed once per
/// training matrix and reused by every boosting round.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& x) : order_(x.cols()) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      auto& idx = order_[c];
      idx.resize(x.rows());
      for (std::size_t r = 0; r < x.rows(); ++r) idx[r] = r;
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x(a, c) < x(b, c) || (x(a, c) == x(b, c) && a < b);
      });
    }
  }
  std::span<const std::size_t> column(std::size_t c) const { return order_[c]; }

 private:
  std::vector<std::vector<std::size_t>> order_;
};

namespace detail {

struct NodeStats {
  double g = 0;  // sum of residuals
  double h = 0;  // sum of weights
  std::size_t n = 0;
};

inline double score(const NodeStats& s) { return s.h > 0 ? s.g * s.g / s.h : 0.0; }

inline double midpoint(double a, double b) {
  double mid = a + (b - a) / 2;
  return mid < b ? mid : a;
}

}  // namespace detail

/// Grows a tree level by level. Candidate thresholds are midpoints between
/// consecutive distinct sorted values inside a node; a split must improve the
/// score strictly and leave at least min_samples_leaf rows on each side. Gain
/// ties keep the lowest feature index, then the smallest threshold.
inline RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals,
                               std::span<const double> weights, const TreeParams& params,
                               const SortedColumns& sorted) {
  const std::size_t n = x.rows();
  if (n == 0) throw DataError("cannot fit a tree on zero rows");
  if (residuals.size() != n || weights.size() != n) {
    throw DataError("residual/weight length does not match rows");
  }
  using detail::NodeStats;
  std::vector<RegressionTree::Node> nodes(1);
  std::vector<int> node_of(n, 0);
  NodeStats root;
  for (std::size_t i = 0; i < n; ++i) {
    root.g += residuals[i];
    root.h += weights[i];
    ++root.n;
  }
  std::vector<NodeStats> stats{root};
  std::vector<int> frontier{0};

  struct Best {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    // Local slot of each frontier node.
    std::vector<int> slot(nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot[std::size_t(frontier[s])] = int(s);
    std::vector<Best> best(frontier.size());

    std::vector<NodeStats> left(frontier.size());
    std::vector<double> last(frontier.size());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      std::fill(left.begin(), left.end(), NodeStats{});
      for (std::size_t i : sorted.column(c)) {
        int s = slot[std::size_t(node_of[i])];
        if (s < 0) continue;
        auto si = std::size_t(s);
        double v = x(i, c);
        NodeStats& l = left[si];
        const NodeStats& total = stats[std::size_t(frontier[si])];
        if (l.n > 0 && v > last[si] && l.n >= params.min_samples_leaf &&
            total.n - l.n >= params.min_samples_leaf) {
          NodeStats r{total.g - l.g, total.h - l.h, total.n - l.n};
          double gain = detail::score(l) + detail::score(r) - detail::score(total);
          double eps = 1e-12 * std::max(1.0, std::abs(best[si].gain));
          if (gain > best[si].gain + eps) {
            best[si] = {gain, int(c), detail::midpoint(last[si], v)};
          }
        }
        l.g += residuals[i];
        l.h += weights[i];
        ++l.n;
        last[si] = v;
      }
    }

    std::vector<int> next;
    std::vector<int> split_left(nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      if (best[s].feature < 0) continue;
      auto id = std::size_t(frontier[s]);
      nodes[id].feature = best[s].feature;
      nodes[id].threshold = best[s].threshold;
      nodes[id].left = int(nodes.size());
      nodes[id].right = int(nodes.size() + 1);
      nodes.resize(nodes.size() + 2);
      stats.resize(stats.size() + 2);
      next.push_back(nodes[id].left);
      next.push_back(nodes[id].right);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = nodes[std::size_t(node_of[i])];
      if (node.is_leaf()) continue;
      if (slot.size() <= std::size_t(node_of[i]) || slot[std::size_t(node_of[i])] < 0) continue;
      int child = x(i, std::size_t(node.feature)) <= node.threshold ? node.left : node.right;
      node_of[i] = child;
      NodeStats& cs = stats[std::size_t(child)];
      cs.g += residuals[i];
      cs.h += weights[i];
      ++cs.n;
    }
    frontier = std::move(next);
  }

  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (!nodes[id].is_leaf()) continue;
    const auto& s = stats[id];
    double value = s.h > 0 ? s.g / s.h : 0.0;
    nodes[id].value = std::clamp(value, -kLeafClamp, kLeafClamp);
  }
  return RegressionTree(std::move(nodes));
}

inline RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals,
                               std::span<const double> weights, const TreeParams& params) {
  return fit_tree(x, residuals, weights, params, SortedColumns(x));
}

/// Fitted ensemble plus the preprocessing it expects.
struct GbmModel {
  double initial_margin = 0.0;
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  GbmConfig config;
  FeatureSchema schema;
  std::optional<StandardizationStats> standardization;

  std::size_t features() const { return schema.size(); }
};

/// Margin after the first `rounds` trees (all trees by default). Trees are
/// summed in order, then scaled once.
inline double predict_margin(const GbmModel& model, std::span<const double> x,
                             std::size_t rounds = std::numeric_limits<std::size_t>::max()) {
  if (!model.schema.names.empty() && x.size() != model.features()) {
    throw DataError("input has " + std::to_string(x.size()) + " features; model schema '" +
                    model.schema.version + "' expects " + std::to_string(model.features()));
  }
  double sum = 0.0;
  std::size_t m = std::min(rounds, model.trees.size());
  for (std::size_t t = 0; t < m; ++t) sum += model.trees[t].predict(x);
  return model.initial_margin + model.learning_rate * sum;
}

/// Inverse link of the exponential loss: 1 / (1 + exp(-2F)).
inline double margin_to_prob(double margin) {
  return 1.0 / (1.0 + std::exp(-2.0 * margin));
}

inline double predict_prob(const GbmModel& model, std::span<const double> x) {
  return margin_to_prob(predict_margin(model, x));
}

inline Label predict_label(const GbmModel& model, std::span<const double> x) {
  return predict_margin(model, x) >= 0.0 ? Label::bot : Label::non_bot;
}

/// Called after every round with the 1-based round number and the training
/// exponential loss sum_i exp(-y_i F(x_i)).
using RoundObserver = std::function<void(std::size_t, double)>;

/// Fits the ensemble on an imputed matrix. The returned model carries no
/// schema or standardization; callers attach those.
inline GbmModel fit_gbm(const Matrix& x, std::span<const Label> labels, const GbmConfig& config,
                        const RoundObserver& observer = {}) {
  config.validate();
  const std::size_t n = x.rows();
  if (labels.size() != n) throw DataError("label count does not match rows");
  std::vector<int> y(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = to_sign(labels[i]);
    positives += y[i] > 0 ? 1 : 0;
    for (double v : x.row(i)) {
      if (is_missing(v)) throw DataError("gbm: training matrix contains missing values");
    }
  }
  if (positives == 0 || positives == n) {
    throw DataError("gbm: training labels contain a single class; both bot and non-bot are required");
  }
  GbmModel model;
  model.config = config;
  model.learning_rate = config.learning_rate;
  model.initial_margin = 0.5 * std::log(double(positives) / double(n - positives));

  SortedColumns sorted(x);
  std::vector<double> margin(n, model.initial_margin);
  std::vector<double> residual(n), weight(n);
  for (std::size_t m = 1; m <= config.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      weight[i] = exponential_loss(y[i], margin[i]);
      residual[i] = double(y[i]) * weight[i];
    }
    RegressionTree tree = fit_tree(x, residual, weight, config.tree(), sorted);
    for (std::size_t i = 0; i < n; ++i) margin[i] += config.learning_rate * tree.predict(x.row(i));
    model.trees.push_back(std::move(tree));
    if (observer) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) loss += exponential_loss(y[i], margin[i]);
      observer(m, loss);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// model.json
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const RegressionTree& tree) {
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  return nodes;
}

inline RegressionTree tree_from_json(const nlohmann::json& j) {
  std::vector<RegressionTree::Node> nodes;
  for (const auto& item : j) {
    RegressionTree::Node n;
    if (item.contains("leaf")) {
      n.value = item.at("leaf").get<double>();
    } else {
      n.feature = item.at("feature").get<int>();
      n.threshold = item.at("threshold").get<double>();
      n.left = item.at("left").get<int>();
      n.right = item.at("right").get<int>();
    }
    nodes.push_back(n);
  }
  return RegressionTree(std::move(nodes));
}

inline nlohmann::ordered_json to_json(const GbmModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "botscreen.gbm.v1";
  j["config"] = {{"n_estimators", m.config.n_estimators},
                 {"learning_rate", m.config.learning_rate},
                 {"loss", "exponential"},
                 {"max_depth", m.config.max_depth},
                 {"min_samples_leaf", m.config.min_samples_leaf},
                 {"seed", m.config.seed}};
  j["schema"] = {{"version", m.schema.version}, {"names", m.schema.names}};
  j["standardization"] =
      m.standardization ? to_json(*m.standardization) : nlohmann::ordered_json(nullptr);
  j["initial_margin"] = m.initial_margin;
  j["learning_rate"] = m.learning_rate;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

inline GbmModel gbm_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "botscreen.gbm.v1") throw DataError("not a botscreen GBM model");
  GbmModel m;
  const auto& c = j.at("config");
  m.config.n_estimators = c.at("n_estimators").get<std::size_t>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.max_depth = c.at("max_depth").get<int>();
  m.config.min_samples_leaf = c.at("min_samples_leaf").get<std::size_t>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  if (c.value("loss", "") != "exponential") throw DataError("unsupported loss in model");
  m.schema.version = j.at("schema").at("version").get<std::string>();
  m.schema.names = j.at("schema").at("names").get<std::vector<std::string>>();
  if (!j.at("standardization").is_null()) {
    m.standardization = standardization_from_json(j.at("standardization"));
    if (m.standardization->size() != m.schema.size()) {
      throw DataError("standardization width does not match schema");
    }
  }
  m.initial_margin = j.at("initial_margin").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  for (const auto& t : j.at("trees")) {
    m.trees.push_back(tree_from_json(t));
    m.trees.back().validate(m.schema.size());
  }
  if (m.trees.size() > m.config.n_estimators) throw DataError("model has more trees than n_estimators");
  return m;
}

}  // namespace botscreen
