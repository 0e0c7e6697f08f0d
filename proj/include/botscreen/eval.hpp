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

/// @file eval.hpp
/// Confusion counts and per-class precision/recall/F1 with an unweighted
/// two-class macro average, stratified k-fold cross-validation of the
/// boosted classifier, and Cohen's kappa.

#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/features.hpp"
#include "botscreen/gbm.hpp"
#include "botscreen/smote.hpp"
#include "json.hpp"

namespace botscreen {

// ---------------------------------------------------------------------------
// Confusion and per-class metrics ("bot" is the positive class)
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw DataError("confusion: " + std::to_string(truth.size()) + " labels vs " +
                    std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool actual = to_sign(truth[i]) > 0;
    bool guess = to_sign(predicted[i]) > 0;
    if (actual && guess) ++cm.tp;
    else if (!actual && guess) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean; 0 when both inputs are 0.
inline double f1_score(double precision, double recall) {
  double denom = precision + recall;
  return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

inline Prf prf_from(double precision, double recall) {
  return {precision, recall, f1_score(precision, recall)};
}

struct ClassMetrics {
  Prf non_bot;
  Prf bot;
  Prf macro;
  /// Set when some precision or recall had a zero denominator (reported as 0).
  bool zero_division = false;
};

/// Macro = unweighted mean of the two per-class values, for each of P, R, F1.
inline ClassMetrics combine(const Prf& non_bot, const Prf& bot) {
  ClassMetrics m;
  m.non_bot = non_bot;
  m.bot = bot;
  m.macro = {(non_bot.precision + bot.precision) / 2, (non_bot.recall + bot.recall) / 2,
             (non_bot.f1 + bot.f1) / 2};
  return m;
}

inline ClassMetrics metrics(const ConfusionMatrix& cm) {
  bool zero = false;
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      zero = true;
      return 0.0;
    }
    return double(num) / double(den);
  };
  Prf bot = prf_from(ratio(cm.tp, cm.tp + cm.fp), ratio(cm.tp, cm.tp + cm.fn));
  Prf non_bot = prf_from(ratio(cm.tn, cm.tn + cm.fn), ratio(cm.tn, cm.tn + cm.fp));
  ClassMetrics m = combine(non_bot, bot);
  m.zero_division = zero;
  return m;
}

inline nlohmann::ordered_json to_json(const Prf& p) {
  return {{"p", p.precision}, {"r", p.recall}, {"f1", p.f1}};
}

/// metrics.json layout.
inline nlohmann::ordered_json to_json(const ClassMetrics& m, const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["per_class"] = {{"non_bot", to_json(m.non_bot)}, {"bot", to_json(m.bot)}};
  j["macro"] = to_json(m.macro);
  j["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
  j["zero_division"] = m.zero_division;
  return j;
}

// ---------------------------------------------------------------------------
// Stratified folds
// ---------------------------------------------------------------------------

/// Fold index per row. Each class is shuffled and dealt round-robin, the deal
/// continuing where the previous class stopped, so per-class fold sizes (and
/// total fold sizes) differ by at most one.
inline std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t k,
                                                 std::uint64_t seed) {
  if (k < 2) throw UsageError("cross-validation needs at least 2 folds (got " + std::to_string(k) + ")");
  std::vector<std::size_t> bots, non_bots;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!is_binary(labels[i])) throw DataError("folds: rows must be labeled bot or non-bot");
    (labels[i] == Label::bot ? bots : non_bots).push_back(i);
  }
  for (const auto* members : {&bots, &non_bots}) {
    if (members->size() < k) {
      throw DataError("folds: class '" +
                      std::string(members == &bots ? "bot" : "non-bot") + "' has " +
                      std::to_string(members->size()) + " rows, fewer than k=" +
                      std::to_string(k));
    }
  }
  std::vector<std::size_t> fold(labels.size());
  Rng rng(seed);
  std::size_t next = 0;
  for (auto* members : {&bots, &non_bots}) {
    rng.shuffle(*members);
    for (std::size_t idx : *members) {
      fold[idx] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool use_smote = true;
  SmoteConfig smote;
  /// Worker threads for (candidate, fold) cells; 0 picks hardware concurrency.
  std::size_t threads = 0;
};

/// Hooks reporting which original row ids each fitted component saw. Row ids
/// index the matrix passed to cross_validate. Called from worker threads.
struct CvObserver {
  virtual ~CvObserver() = default;
  virtual void standardization_fit(std::size_t /*candidate*/, std::size_t /*fold*/,
                                   std::span<const std::size_t> /*rows*/) {}
  /// Real rows given to SMOTE and the rows used as interpolation parents.
  virtual void smote_fit(std::size_t /*candidate*/, std::size_t /*fold*/,
                         std::span<const std::size_t> /*rows*/,
                         std::span<const std::size_t> /*parents*/) {}
  /// Real rows the model was trained on (synthetic rows excluded).
  virtual void model_fit(std::size_t /*candidate*/, std::size_t /*fold*/,
                         std::span<const std::size_t> /*rows*/) {}
  virtual void evaluated(std::size_t /*candidate*/, std::size_t /*fold*/,
                         std::span<const std::size_t> /*rows*/) {}
};

struct CvCell {
  std::size_t candidate = 0;
  std::size_t fold = 0;
  ConfusionMatrix confusion;
  ClassMetrics metrics;
  std::size_t validation_bots = 0;
  std::size_t validation_rows = 0;
};

struct CvReport {
  std::size_t folds = 0;
  std::vector<GbmConfig> grid;
  std::vector<CvCell> cells;  // candidate-major, fold-minor
  std::vector<double> mean_bot_f1;
  std::size_t selected = 0;
  std::string criterion = "mean_bot_f1";
};

/// Default grid: depth in {1,2,3,4} x min_samples_leaf in {1,5,20}, with the
/// given number of estimators and learning rate.
inline std::vector<GbmConfig> default_gbm_grid(const GbmConfig& base = {}) {
  std::vector<GbmConfig> grid;
  for (int depth : {1, 2, 3, 4}) {
    for (std::size_t leaf : {std::size_t{1}, std::size_t{5}, std::size_t{20}}) {
      GbmConfig c = base;
      c.max_depth = depth;
      c.min_samples_leaf = leaf;
      grid.push_back(c);
    }
  }
  return grid;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Standardize, rebalance (optional) and fit on the training rows, in that
/// order, each fitted only on those rows.
struct FittedClassifier {
  GbmModel model;
  std::vector<SyntheticOrigin> smote_origins;
};

inline FittedClassifier fit_classifier(const Matrix& raw, std::span<const Label> labels,
                                       const FeatureSchema& schema, const GbmConfig& config,
                                       bool use_smote, const SmoteConfig& smote) {
  StandardizationStats stats = fit_standardization(raw, schema.names);
  Matrix x = apply_standardization(raw, stats);
  FittedClassifier out;
  if (use_smote) {
    SmoteResult balanced = smote_rebalance(x, labels, smote);
    out.model = fit_gbm(balanced.x, balanced.y, config);
    out.smote_origins = std::move(balanced.origins);
  } else {
    out.model = fit_gbm(x, labels, config);
  }
  out.model.schema = schema;
  out.model.standardization = std::move(stats);
  return out;
}

/// Predictions for raw (unstandardized, possibly masked) rows.
inline std::vector<Label> predict_labels(const GbmModel& model, const Matrix& raw) {
  Matrix x = model.standardization ? apply_standardization(raw, *model.standardization) : raw;
  std::vector<Label> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict_label(model, x.row(r)));
  return out;
}

/// k-fold CV over a candidate grid. For each (candidate, fold) cell the
/// standardization, SMOTE and model see only fold-training rows; the held-out
/// fold keeps its natural class balance. The candidate with the highest mean
/// bot-class F1 is selected, ties going to the earlier candidate.
inline CvReport cross_validate(const Matrix& raw, std::span<const Label> labels,
                               const FeatureSchema& schema, const std::vector<GbmConfig>& grid,
                               const CvOptions& options, CvObserver* observer = nullptr) {
  if (grid.empty()) throw UsageError("cross-validation grid is empty");
  if (labels.size() != raw.rows()) throw DataError("label count does not match rows");
  auto fold_of = stratified_folds(labels, options.folds, options.seed);

  CvReport report;
  report.folds = options.folds;
  report.grid = grid;
  report.cells.resize(grid.size() * options.folds);

  detail::parallel_for(report.cells.size(), options.threads, [&](std::size_t cell_index) {
    std::size_t cand = cell_index / options.folds;
    std::size_t fold = cell_index % options.folds;
    std::vector<std::size_t> train_rows, valid_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      (fold_of[i] == fold ? valid_rows : train_rows).push_back(i);
    }
    Matrix train_x = raw.select_rows(train_rows);
    std::vector<Label> train_y;
    for (std::size_t i : train_rows) train_y.push_back(labels[i]);
    try {
      FittedClassifier fitted = fit_classifier(train_x, train_y, schema, grid[cand],
                                               options.use_smote, options.smote);
      if (observer) {
        observer->standardization_fit(cand, fold, train_rows);
        if (options.use_smote) {
          std::vector<std::size_t> parents;
          for (const auto& o : fitted.smote_origins) {
            parents.push_back(train_rows[o.parent_a]);
            parents.push_back(train_rows[o.parent_b]);
          }
          observer->smote_fit(cand, fold, train_rows, parents);
        }
        observer->model_fit(cand, fold, train_rows);
        observer->evaluated(cand, fold, valid_rows);
      }
      Matrix valid_x = raw.select_rows(valid_rows);
      std::vector<Label> valid_y;
      for (std::size_t i : valid_rows) valid_y.push_back(labels[i]);
      auto predicted = predict_labels(fitted.model, valid_x);
      CvCell& cell = report.cells[cell_index];
      cell.candidate = cand;
      cell.fold = fold;
      cell.confusion = confusion(valid_y, predicted);
      cell.metrics = metrics(cell.confusion);
      cell.validation_rows = valid_rows.size();
      cell.validation_bots = std::size_t(std::count(valid_y.begin(), valid_y.end(), Label::bot));
    } catch (const Error& e) {
      throw DataError("cross-validation candidate " + std::to_string(cand) + ", fold " +
                      std::to_string(fold) + ": " + e.what());
    }
  });

  report.mean_bot_f1.assign(grid.size(), 0.0);
  for (const auto& cell : report.cells) report.mean_bot_f1[cell.candidate] += cell.metrics.bot.f1;
  for (double& v : report.mean_bot_f1) v /= double(options.folds);
  for (std::size_t c = 1; c < grid.size(); ++c) {
    if (report.mean_bot_f1[c] > report.mean_bot_f1[report.selected]) report.selected = c;
  }
  return report;
}

inline nlohmann::ordered_json to_json(const GbmConfig& c) {
  return {{"n_estimators", c.n_estimators}, {"learning_rate", c.learning_rate},
          {"max_depth", c.max_depth},       {"min_samples_leaf", c.min_samples_leaf},
          {"seed", c.seed}};
}

inline nlohmann::ordered_json to_json(const CvReport& r) {
  nlohmann::ordered_json j;
  j["folds"] = r.folds;
  j["criterion"] = r.criterion;
  auto grid = nlohmann::ordered_json::array();
  for (const auto& c : r.grid) grid.push_back(to_json(c));
  j["grid"] = std::move(grid);
  auto cells = nlohmann::ordered_json::array();
  for (const auto& cell : r.cells) {
    nlohmann::ordered_json cj = to_json(cell.metrics, cell.confusion);
    cj["candidate"] = cell.candidate;
    cj["fold"] = cell.fold;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  j["mean_bot_f1"] = r.mean_bot_f1;
  j["selected"] = r.selected;
  j["selected_config"] = to_json(r.grid[r.selected]);
  return j;
}

// ---------------------------------------------------------------------------
// Cohen's kappa
// ---------------------------------------------------------------------------

struct KappaReport {
  std::vector<std::string> categories;            // sorted
  std::vector<std::vector<std::size_t>> counts;   // [a][b]
  std::size_t n = 0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  double kappa = 0.0;
};

/// kappa = (p_o - p_e) / (1 - p_e), computed from integer counts as
/// (n * agree - sum r_i c_i) / (n^2 - sum r_i c_i). Defined as 1 when p_e = 1.
inline KappaReport cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw DataError("kappa: annotation sequences differ in length (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw DataError("kappa: no aligned annotations");
  KappaReport r;
  std::map<std::string, std::size_t> index;
  for (const auto& s : a) index.emplace(s, 0);
  for (const auto& s : b) index.emplace(s, 0);
  for (auto& [name, i] : index) {
    i = r.categories.size();
    r.categories.push_back(name);
  }
  const std::size_t c = r.categories.size();
  r.counts.assign(c, std::vector<std::size_t>(c, 0));
  for (std::size_t i = 0; i < a.size(); ++i) ++r.counts[index[a[i]]][index[b[i]]];
  r.n = a.size();
  std::uint64_t agree = 0, chance = 0;
  for (std::size_t i = 0; i < c; ++i) {
    agree += r.counts[i][i];
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += r.counts[i][j];
      col += r.counts[j][i];
    }
    chance += row * col;
  }
  double n = double(r.n);
  r.observed = double(agree) / n;
  r.expected = double(chance) / (n * n);
  std::uint64_t n2 = std::uint64_t(r.n) * std::uint64_t(r.n);
  if (chance == n2) {
    r.kappa = 1.0;
  } else {
    r.kappa = (double(r.n) * double(agree) - double(chance)) / (double(n2) - double(chance));
  }
  return r;
}

inline nlohmann::ordered_json to_json(const KappaReport& r) {
  nlohmann::ordered_json j;
  j["categories"] = r.categories;
  j["counts"] = r.counts;
  j["n"] = r.n;
  j["p_o"] = r.observed;
  j["p_e"] = r.expected;
  j["kappa"] = r.kappa;
  return j;
}

/// Annotation CSV: header "user_id,label", one row per user.
inline std::vector<std::pair<std::string, std::string>> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotations '" + path + "'");
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DataError(path + ":" + std::to_string(number) + ": expected 'user_id,label'");
    }
    if (number == 1 && line == "user_id,label") continue;
    rows.emplace_back(line.substr(0, comma), line.substr(comma + 1));
  }
  return rows;
}

struct AlignedAnnotations {
  std::vector<std::string> a;
  std::vector<std::string> b;
  std::size_t only_a = 0;
  std::size_t only_b = 0;
};

/// Inner join on user_id, in the order of the first file.
inline AlignedAnnotations join_annotations(
    const std::vector<std::pair<std::string, std::string>>& first,
    const std::vector<std::pair<std::string, std::string>>& second) {
  std::map<std::string, std::string> lookup;
  for (const auto& [id, label] : second) {
    if (!lookup.emplace(id, label).second) throw DataError("duplicate user_id '" + id + "' in annotations");
  }
  AlignedAnnotations out;
  std::set<std::string> seen;
  for (const auto& [id, label] : first) {
    if (!seen.insert(id).second) throw DataError("duplicate user_id '" + id + "' in annotations");
    auto it = lookup.find(id);
    if (it == lookup.end()) {
      ++out.only_a;
      continue;
    }
    out.a.push_back(label);
    out.b.push_back(it->second);
  }
  out.only_b = second.size() - out.a.size();
  return out;
}

}  // namespace botscreen
