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

/// @file pipeline.hpp
/// End-to-end compositions behind the command-line tool: configuration,
/// features.csv, topic-model fitting, training and evaluation of the three
/// screening systems.
///
///   botometer-threshold  bot iff score >= tau (tau calibrated by CV)
///   gbm-botometer        boosted classifier on the score alone
///   gbm-full             boosted classifier on the score plus the extended
///                        user features

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "botscreen/botometer.hpp"
#include "botscreen/core.hpp"
#include "botscreen/corpus.hpp"
#include "botscreen/eval.hpp"
#include "botscreen/features.hpp"
#include "botscreen/gbm.hpp"
#include "botscreen/smote.hpp"
#include "botscreen/synthetic.hpp"
#include "botscreen/topics.hpp"
#include "json.hpp"
#include "toml.hpp"

namespace botscreen {

enum class System { botometer_threshold, gbm_botometer_only, gbm_full };

inline constexpr std::array<System, 3> kAllSystems = {
    System::botometer_threshold, System::gbm_botometer_only, System::gbm_full};

inline std::string_view to_string(System s) {
  switch (s) {
    case System::botometer_threshold:
      return "botometer-threshold";
    case System::gbm_botometer_only:
      return "gbm-botometer";
    case System::gbm_full:
      return "gbm-full";
  }
  return "gbm-full";
}

inline System parse_system(std::string_view text) {
  for (System s : kAllSystems) {
    if (text == to_string(s)) return s;
  }
  throw UsageError("unknown system '" + std::string(text) +
                   "' (expected botometer-threshold, gbm-botometer or gbm-full)");
}

struct PipelinePaths {
  std::string out_dir = ".";
  // Empty means "<out_dir>/<default file name>".
  std::string users, tweets, scores, lda_model, model, features;
};

struct PipelineConfig {
  System system = System::gbm_full;
  std::uint64_t seed = 0;
  PipelinePaths paths;
  SplitSpec split;
  bool use_smote = true;
  SmoteConfig smote;
  GbmConfig gbm;
  std::vector<int> grid_depths{1, 2, 3, 4};
  std::vector<std::size_t> grid_min_leaf{1, 5, 20};
  std::size_t cv_folds = 5;
  std::optional<double> tau;
  double tau_grid_step = 0.01;
  LdaParams lda;
  ProviderConfig provider;
  std::size_t threads = 0;

  // Component seeds; unset ones follow `seed`.
  std::optional<std::uint64_t> split_seed, smote_seed, gbm_seed, cv_seed, lda_seed;

  /// Copies of the component configs with their seeds resolved.
  SplitSpec split_spec() const {
    SplitSpec s = split;
    s.seed = split_seed.value_or(seed);
    return s;
  }
  SmoteConfig smote_config() const {
    SmoteConfig s = smote;
    s.seed = smote_seed.value_or(seed);
    return s;
  }
  GbmConfig gbm_config() const {
    GbmConfig g = gbm;
    g.seed = gbm_seed.value_or(seed);
    return g;
  }
  LdaParams lda_params() const {
    LdaParams p = lda;
    p.seed = lda_seed.value_or(seed);
    return p;
  }
  CvOptions cv_options() const {
    return {cv_folds, cv_seed.value_or(seed), use_smote, smote_config(), threads};
  }
  std::vector<GbmConfig> gbm_grid() const {
    std::vector<GbmConfig> grid;
    for (int depth : grid_depths) {
      for (std::size_t leaf : grid_min_leaf) {
        GbmConfig c = gbm_config();
        c.max_depth = depth;
        c.min_samples_leaf = leaf;
        grid.push_back(c);
      }
    }
    return grid;
  }
  std::vector<double> tau_grid() const {
    if (!(tau_grid_step > 0 && tau_grid_step <= 1)) throw UsageError("tau grid step must lie in (0, 1]");
    std::vector<double> grid;
    auto steps = std::size_t(std::floor(1.0 / tau_grid_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) grid.push_back(std::min(1.0, double(i) * tau_grid_step));
    return grid;
  }

  std::string path(const std::string& explicit_path, const char* default_name) const {
    if (!explicit_path.empty()) return explicit_path;
    return (std::filesystem::path(paths.out_dir) / default_name).string();
  }
  std::string users_path() const { return path(paths.users, "users.jsonl"); }
  std::string tweets_path() const { return path(paths.tweets, "tweets.jsonl"); }
  std::string scores_path() const { return path(paths.scores, "scores.jsonl"); }
  std::string lda_path() const { return path(paths.lda_model, "lda.json"); }
  std::string model_path() const { return path(paths.model, "model.json"); }
  std::string features_path() const { return path(paths.features, "features.csv"); }

  /// Provider settings; the score cache is the scores file.
  ProviderConfig provider_config() const {
    ProviderConfig p = provider;
    p.cache_path = scores_path();
    p.token_from_environment();
    return p;
  }
};

namespace detail {

template <typename T>
void read_seed(const toml::table& t, std::optional<T>& target) {
  if (auto v = t["seed"].value<std::int64_t>()) target = T(*v);
}

inline void read_string(const toml::table& t, const char* key, std::string& target) {
  if (const toml::node* node = t.get(key)) {
    auto v = node->value<std::string>();
    if (!v) throw UsageError(std::string("'") + key + "' must be a string");
    target = *v;
  }
}

}  // namespace detail

/// Overlays the TOML document's pipeline tables onto `config`.
inline void apply_toml(const toml::table& doc, PipelineConfig& c) {
  using detail::read_number;
  using detail::read_string;
  if (const auto* t = doc["pipeline"].as_table()) {
    if (auto s = (*t)["system"].value<std::string>()) c.system = parse_system(*s);
    read_number(*t, "seed", c.seed);
    read_number(*t, "threads", c.threads);
  }
  if (const auto* t = doc["paths"].as_table()) {
    read_string(*t, "out_dir", c.paths.out_dir);
    read_string(*t, "users", c.paths.users);
    read_string(*t, "tweets", c.paths.tweets);
    read_string(*t, "scores", c.paths.scores);
    read_string(*t, "lda_model", c.paths.lda_model);
    read_string(*t, "model", c.paths.model);
    read_string(*t, "features", c.paths.features);
  }
  if (const auto* t = doc["split"].as_table()) {
    read_number(*t, "train_fraction", c.split.train_fraction);
    detail::read_seed(*t, c.split_seed);
  }
  if (const auto* t = doc["smote"].as_table()) {
    if (auto v = (*t)["enabled"].value<bool>()) c.use_smote = *v;
    read_number(*t, "k_neighbors", c.smote.k_neighbors);
    read_number(*t, "target_ratio", c.smote.target_ratio);
    detail::read_seed(*t, c.smote_seed);
  }
  if (const auto* t = doc["gbm"].as_table()) {
    read_number(*t, "n_estimators", c.gbm.n_estimators);
    read_number(*t, "learning_rate", c.gbm.learning_rate);
    read_number(*t, "max_depth", c.gbm.max_depth);
    read_number(*t, "min_samples_leaf", c.gbm.min_samples_leaf);
    if (auto loss = (*t)["loss"].value<std::string>(); loss && *loss != "exponential") {
      throw UsageError("only the exponential loss is supported");
    }
    detail::read_seed(*t, c.gbm_seed);
  }
  if (const auto* t = doc["cv"].as_table()) {
    read_number(*t, "folds", c.cv_folds);
    detail::read_seed(*t, c.cv_seed);
    if (const auto* a = (*t)["max_depth"].as_array()) {
      c.grid_depths.clear();
      for (const auto& v : *a) c.grid_depths.push_back(int(v.value<std::int64_t>().value_or(0)));
    }
    if (const auto* a = (*t)["min_samples_leaf"].as_array()) {
      c.grid_min_leaf.clear();
      for (const auto& v : *a) c.grid_min_leaf.push_back(std::size_t(v.value<std::int64_t>().value_or(0)));
    }
  }
  if (const auto* t = doc["threshold"].as_table()) {
    if (auto v = (*t)["tau"].value<double>()) c.tau = *v;
    read_number(*t, "grid_step", c.tau_grid_step);
  }
  if (const auto* t = doc["lda"].as_table()) {
    read_number(*t, "topics", c.lda.topics);
    if (auto v = (*t)["alpha"].value<double>()) c.lda.alpha = *v;
    read_number(*t, "beta", c.lda.beta);
    read_number(*t, "iterations", c.lda.iterations);
    read_number(*t, "min_document_frequency", c.lda.min_document_frequency);
    detail::read_seed(*t, c.lda_seed);
  }
  if (const auto* t = doc["provider"].as_table()) {
    read_string(*t, "endpoint", c.provider.endpoint);
    read_number(*t, "timeout_seconds", c.provider.timeout_seconds);
    read_number(*t, "max_retries", c.provider.max_retries);
    read_number(*t, "backoff_base_ms", c.provider.backoff_base_ms);
    read_number(*t, "concurrency", c.provider.concurrency);
  }
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  PipelineConfig c;
  try {
    apply_toml(toml::parse_file(path), c);
  } catch (const toml::parse_error& e) {
    throw UsageError("cannot parse '" + path + "': " + std::string(e.description()));
  }
  return c;
}

// ---------------------------------------------------------------------------
// features.csv
// ---------------------------------------------------------------------------

/// Labeled feature rows in a fixed schema. Missing entries are NaN.
struct FeatureTable {
  FeatureSchema schema;
  std::vector<std::string> user_ids;
  std::vector<Label> labels;
  Matrix x;

  std::size_t rows() const { return user_ids.size(); }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Header "user_id,label,<schema names>"; missing values are empty fields.
inline void write_features_csv(std::ostream& out, const FeatureTable& table) {
  out << "user_id,label";
  for (const auto& n : table.schema.names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << detail::csv_field(table.user_ids[r]) << ',' << to_string(table.labels[r]);
    for (double v : table.x.row(r)) {
      out << ',';
      if (!is_missing(v)) out << detail::format_number(v);
    }
    out << '\n';
  }
}

inline FeatureTable read_features_csv(std::istream& in, const std::string& source = "features") {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty features file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "user_id" || header[1] != "label") {
    throw DataError(source + ": header must start with 'user_id,label'");
  }
  FeatureTable table;
  table.schema = schema_from_names({header.begin() + 2, header.end()});
  table.x = Matrix(0, table.schema.size());
  std::size_t number = 1;
  std::vector<double> values(table.schema.size());
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    auto where = source + ":" + std::to_string(number) + ": ";
    if (fields.size() != header.size()) throw DataError(where + "wrong number of fields");
    auto label = parse_label(fields[1]);
    if (!label || !is_binary(*label)) throw DataError(where + "label must be bot or non-bot");
    for (std::size_t c = 0; c < values.size(); ++c) {
      const std::string& f = fields[c + 2];
      if (f.empty()) {
        values[c] = kMissing;
        continue;
      }
      char* end = nullptr;
      values[c] = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size()) throw DataError(where + "bad number '" + f + "'");
    }
    table.user_ids.push_back(fields[0]);
    table.labels.push_back(*label);
    table.x.append_row(values);
  }
  return table;
}

inline FeatureTable load_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open features '" + path + "'");
  return read_features_csv(in, path);
}

// ---------------------------------------------------------------------------
// Compositions
// ---------------------------------------------------------------------------

inline FeatureSchema schema_for(System system, std::size_t topics) {
  return system == System::gbm_full ? full_schema(topics) : botometer_only_schema();
}

/// Loads users and tweets (orphan tweets are counted, not attached).
inline Cohort load_cohort(const std::string& users_path, const std::string& tweets_path,
                          TweetLoadReport* report = nullptr) {
  Cohort cohort = load_users(users_path);
  TweetLoadReport r = load_tweets(tweets_path, cohort);
  if (report) *report = r;
  return cohort;
}

/// Fits the topic model on the tweets of the training users only.
inline TopicModel fit_topic_model(const Cohort& cohort, const PipelineConfig& config) {
  Cohort labeled = filter_labeled(cohort);
  CohortSplit split = stratified_split(labeled, config.split_spec());
  auto docs = cohort_documents(split.train);
  return fit_lda(docs, config.lda_params());
}

/// One row per bot/non-bot user, in cohort order. The topic model is
/// required for gbm-full; users without a score get a masked score.
inline FeatureTable featurize(const Cohort& cohort,
                              const std::unordered_map<std::string, BotometerScore>& scores,
                              const TopicModel* topics, System system, std::size_t threads = 0) {
  if (system == System::gbm_full && !topics) {
    throw DataError("gbm-full features need an LDA model; run fit-lda first or set paths.lda_model");
  }
  FeatureTable table;
  table.schema = schema_for(system, topics ? topics->topics : 0);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    if (is_binary(cohort.users()[i].label)) rows.push_back(i);
  }
  std::vector<FeatureVector> vectors(rows.size());
  detail::parallel_for(rows.size(), threads, [&](std::size_t r) {
    const UserRecord& user = cohort.users()[rows[r]];
    const auto& tweets = cohort.tweets_of(rows[r]);
    ExternalSignals external;
    if (auto it = scores.find(user.user_id); it != scores.end()) external.botometer = it->second.score;
    if (system == System::gbm_full) external.topic_means = user_topic_means(*topics, tweets);
    vectors[r] = assemble_features(user, tweets, external, table.schema);
  });
  table.x = Matrix(0, table.schema.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    table.user_ids.push_back(vectors[r].user_id);
    table.labels.push_back(cohort.users()[rows[r]].label);
    table.x.append_row(vectors[r].values);
  }
  return table;
}

struct TableSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline TableSplit split_rows(const FeatureTable& table, const SplitSpec& spec) {
  auto in_train = stratified_membership(table.labels, spec);
  TableSplit s;
  for (std::size_t i = 0; i < in_train.size(); ++i) (in_train[i] ? s.train : s.test).push_back(i);
  return s;
}

/// The deployed threshold classifier.
struct ThresholdModel {
  Threshold threshold;
  FeatureSchema schema = botometer_only_schema();
};

using TrainedModel = std::variant<ThresholdModel, GbmModel>;

inline nlohmann::ordered_json to_json(const ThresholdModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "botscreen.threshold.v1";
  j["tau"] = m.threshold.tau;
  j["schema"] = {{"version", m.schema.version}, {"names", m.schema.names}};
  return j;
}

inline nlohmann::ordered_json to_json(const TrainedModel& m) {
  return std::visit([](const auto& model) { return nlohmann::ordered_json(to_json(model)); }, m);
}

inline TrainedModel trained_model_from_json(const nlohmann::json& j) {
  std::string format = j.value("format", "");
  if (format == "botscreen.threshold.v1") {
    ThresholdModel m{Threshold(j.at("tau").get<double>())};
    m.schema.version = j.at("schema").at("version").get<std::string>();
    m.schema.names = j.at("schema").at("names").get<std::vector<std::string>>();
    return m;
  }
  if (format == "botscreen.gbm.v1") return gbm_from_json(j);
  throw DataError("unrecognized model format '" + format + "'");
}

inline TrainedModel load_trained_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path + "'");
  try {
    return trained_model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model '" + path + "': " + e.what());
  }
}

struct TrainResult {
  TrainedModel model;
  nlohmann::ordered_json cv_report;
};

inline std::vector<std::size_t> scored_rows(const FeatureTable& table,
                                            std::span<const std::size_t> rows) {
  auto col = table.schema.index_of("botometer_score");
  if (!col) throw DataError("features lack a botometer_score column");
  std::vector<std::size_t> out;
  for (std::size_t r : rows) {
    if (!is_missing(table.x(r, *col))) out.push_back(r);
  }
  return out;
}

/// Training side of a system: CV model selection on the training split, then
/// a final fit on the whole training split.
inline TrainResult train_system(const FeatureTable& table, const PipelineConfig& config) {
  FeatureSchema expected = config.system == System::gbm_full
                               ? full_schema(table.schema.topic_count())
                               : botometer_only_schema();
  expected.require_compatible(table.schema, std::string("system ") + std::string(to_string(config.system)));
  TableSplit split = split_rows(table, config.split_spec());

  if (config.system == System::botometer_threshold) {
    auto rows = scored_rows(table, split.train);
    std::vector<double> scores;
    std::vector<Label> labels;
    for (std::size_t r : rows) {
      scores.push_back(table.x(r, 0));
      labels.push_back(table.labels[r]);
    }
    auto calibration = calibrate_threshold(scores, labels, config.cv_folds, config.tau_grid(),
                                           config.cv_seed.value_or(config.seed));
    nlohmann::ordered_json report = to_json(calibration);
    report["system"] = to_string(config.system);
    report["unscored_training_users"] = split.train.size() - rows.size();
    return {ThresholdModel{calibration.best, table.schema}, std::move(report)};
  }

  Matrix train_x = table.x.select_rows(split.train);
  std::vector<Label> train_y;
  for (std::size_t r : split.train) train_y.push_back(table.labels[r]);
  CvReport cv = cross_validate(train_x, train_y, table.schema, config.gbm_grid(),
                               config.cv_options());
  FittedClassifier fitted = fit_classifier(train_x, train_y, table.schema, cv.grid[cv.selected],
                                           config.use_smote, config.smote_config());
  nlohmann::ordered_json report = to_json(cv);
  report["system"] = to_string(config.system);
  report["smote"] = {{"enabled", config.use_smote},
                     {"k_neighbors", config.smote.k_neighbors},
                     {"target_ratio", config.smote.target_ratio},
                     {"synthetic_rows", fitted.smote_origins.size()}};
  return {std::move(fitted.model), std::move(report)};
}

struct EvaluationResult {
  ConfusionMatrix confusion;
  ClassMetrics metrics;
  std::size_t test_rows = 0;
  /// Test users without a score (threshold system predicts non-bot for them).
  std::size_t unscored = 0;

  nlohmann::ordered_json to_json(System system) const {
    nlohmann::ordered_json j = botscreen::to_json(metrics, confusion);
    j["system"] = botscreen::to_string(system);
    j["test_rows"] = test_rows;
    j["unscored"] = unscored;
    return j;
  }
};

/// Predictions on the held-out split. A threshold override applies to the
/// threshold system only.
inline EvaluationResult evaluate_system(const FeatureTable& table, const TrainedModel& model,
                                        const PipelineConfig& config) {
  TableSplit split = split_rows(table, config.split_spec());
  std::vector<Label> truth, predicted;
  EvaluationResult result;
  result.test_rows = split.test.size();
  for (std::size_t r : split.test) truth.push_back(table.labels[r]);

  if (const auto* tm = std::get_if<ThresholdModel>(&model)) {
    auto col = table.schema.index_of("botometer_score");
    if (!col) throw DataError("features lack a botometer_score column");
    Threshold tau = config.tau ? Threshold(*config.tau) : tm->threshold;
    for (std::size_t r : split.test) {
      double s = table.x(r, *col);
      if (is_missing(s)) {
        ++result.unscored;
        predicted.push_back(Label::non_bot);
      } else {
        predicted.push_back(threshold_classify(s, tau));
      }
    }
  } else {
    const auto& gbm = std::get<GbmModel>(model);
    gbm.schema.require_compatible(table.schema, "evaluate");
    predicted = predict_labels(gbm, table.x.select_rows(split.test));
  }
  result.confusion = confusion(truth, predicted);
  result.metrics = metrics(result.confusion);
  return result;
}

}  // namespace botscreen
