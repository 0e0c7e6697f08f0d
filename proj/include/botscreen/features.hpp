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

/// @file features.hpp
/// User-level features: repetition, link rate, daily posting rate, post
/// length, profile signals; schema handling, standardization and per-class
/// distribution summaries.
///
/// Every per-tweet extractor returns std::nullopt for a user without tweets;
/// assemble_features turns that into a masked (NaN) entry.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/corpus.hpp"
#include "botscreen/lexicon.hpp"
#include "botscreen/text.hpp"
#include "json.hpp"

namespace botscreen {

// ---------------------------------------------------------------------------
// Per-user extractors
// ---------------------------------------------------------------------------

/// Distinct whitespace-normalized texts over tweet count, in (0, 1].
inline std::optional<double> tweet_diversity(std::span<const Tweet> tweets) {
  if (tweets.empty()) return std::nullopt;
  std::unordered_set<std::string> distinct;
  for (const auto& t : tweets) distinct.insert(text::normalize_whitespace(t.text));
  return double(distinct.size()) / double(tweets.size());
}

/// Fraction of tweets containing at least one URL.
inline std::optional<double> url_score(std::span<const Tweet> tweets) {
  if (tweets.empty()) return std::nullopt;
  std::size_t with_url = 0;
  for (const auto& t : tweets) with_url += text::contains_url(t.text) ? 1 : 0;
  return double(with_url) / double(tweets.size());
}

/// Daily tweet counts over every UTC day from the first tweet's day to the
/// last tweet's day, zero days included.
inline std::vector<double> daily_counts(std::span<const Tweet> tweets) {
  if (tweets.empty()) return {};
  std::int64_t first = utc_day(tweets.front().created_at);
  std::int64_t last = first;
  for (const auto& t : tweets) {
    first = std::min(first, utc_day(t.created_at));
    last = std::max(last, utc_day(t.created_at));
  }
  std::vector<double> counts(std::size_t(last - first + 1), 0.0);
  for (const auto& t : tweets) counts[std::size_t(utc_day(t.created_at) - first)] += 1.0;
  return counts;
}

inline std::optional<Moments> daily_post_stats(std::span<const Tweet> tweets) {
  if (tweets.empty()) return std::nullopt;
  auto counts = daily_counts(tweets);
  return population_moments(counts);
}

/// Mean and population std of whitespace-token counts per tweet.
inline std::optional<Moments> post_length_stats(std::span<const Tweet> tweets) {
  if (tweets.empty()) return std::nullopt;
  std::vector<double> lengths;
  lengths.reserve(tweets.size());
  for (const auto& t : tweets) lengths.push_back(double(text::split_whitespace(t.text).size()));
  return population_moments(lengths);
}

namespace detail {

inline bool any_token_in(std::string_view s, const WordSet& lexicon, bool camel) {
  for (auto run : text::split_alnum(s)) {
    if (lexicon.contains(text::lowercase(run))) return true;
    if (!camel) continue;
    for (auto part : text::split_camel(run)) {
      if (lexicon.contains(text::lowercase(part))) return true;
    }
  }
  return false;
}

}  // namespace detail

/// 1 if the display name (split on non-alphanumerics) or, failing that, the
/// screen name (split on non-alphanumerics and case/digit boundaries)
/// contains a lexicon entry; 0 otherwise.
inline int name_present(const UserRecord& user, const WordSet& lexicon) {
  if (user.display_name && detail::any_token_in(*user.display_name, lexicon, false)) {
    return 1;
  }
  return detail::any_token_in(user.screen_name, lexicon, true) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

/// Ordered feature names plus a version tag. Two schemas are compatible only
/// if both match exactly.
struct FeatureSchema {
  std::string version;
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    return std::nullopt;
  }

  /// Number of topic_mean_* columns.
  std::size_t topic_count() const {
    std::size_t k = 0;
    for (const auto& n : names) k += n.starts_with("topic_mean_") ? 1 : 0;
    return k;
  }

  void require_compatible(const FeatureSchema& other, std::string_view what) const {
    if (version != other.version || names != other.names) {
      throw DataError(std::string(what) + ": feature schema mismatch (expected '" +
                      version + "', found '" + other.version + "')");
    }
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

inline constexpr std::string_view kSchemaFamily = "botscreen.features.v1";

/// Schema holding only the bot score.
inline FeatureSchema botometer_only_schema() {
  return {std::string(kSchemaFamily) + "/botometer", {"botometer_score"}};
}

/// Bot score plus every extended feature, with `topics` topic columns.
inline FeatureSchema full_schema(std::size_t topics = 5) {
  FeatureSchema s;
  s.version = std::string(kSchemaFamily) + "/full-k" + std::to_string(topics);
  s.names = {"botometer_score", "tweet_diversity", "url_score", "daily_mean", "daily_std"};
  for (std::size_t k = 1; k <= topics; ++k) s.names.push_back("topic_mean_" + std::to_string(k));
  for (const char* n : {"post_len_mean", "post_len_std", "face_count", "name_present"}) {
    s.names.emplace_back(n);
  }
  return s;
}

/// Recovers a schema from its ordered names (e.g. a CSV header), validating
/// that they form one of the known layouts.
inline FeatureSchema schema_from_names(const std::vector<std::string>& names) {
  if (names == botometer_only_schema().names) return botometer_only_schema();
  std::size_t topics = 0;
  for (const auto& n : names) topics += n.starts_with("topic_mean_") ? 1 : 0;
  FeatureSchema full = full_schema(topics);
  if (names == full.names) return full;
  throw DataError("unrecognized feature columns; not a known schema layout");
}

/// Ordered values for one user; masked entries are NaN with the mask set.
struct FeatureVector {
  std::string user_id;
  std::vector<double> values;
  std::vector<bool> missing;

  bool is_missing(std::size_t i) const { return missing[i]; }
};

/// Inputs that do not come from the user's own record and tweets.
struct ExternalSignals {
  std::optional<std::vector<double>> topic_means;
  std::optional<double> botometer;
};

inline FeatureVector assemble_features(const UserRecord& user, std::span<const Tweet> tweets,
                                       const ExternalSignals& external,
                                       const FeatureSchema& schema,
                                       const WordSet& lexicon = bundled_given_names()) {
  std::size_t k = schema.topic_count();
  if (external.topic_means && external.topic_means->size() != k) {
    throw DataError("topic means have " + std::to_string(external.topic_means->size()) +
                    " entries but schema '" + schema.version + "' expects " +
                    std::to_string(k));
  }
  std::map<std::string, std::optional<double>, std::less<>> available;
  available["botometer_score"] = external.botometer;
  available["tweet_diversity"] = tweet_diversity(tweets);
  available["url_score"] = url_score(tweets);
  auto daily = daily_post_stats(tweets);
  available["daily_mean"] = daily ? std::optional(daily->mean) : std::nullopt;
  available["daily_std"] = daily ? std::optional(daily->std) : std::nullopt;
  for (std::size_t t = 0; t < k; ++t) {
    available["topic_mean_" + std::to_string(t + 1)] =
        external.topic_means ? std::optional((*external.topic_means)[t]) : std::nullopt;
  }
  auto length = post_length_stats(tweets);
  available["post_len_mean"] = length ? std::optional(length->mean) : std::nullopt;
  available["post_len_std"] = length ? std::optional(length->std) : std::nullopt;
  available["face_count"] =
      user.face_count ? std::optional(double(*user.face_count)) : std::nullopt;
  available["name_present"] = double(name_present(user, lexicon));

  FeatureVector fv;
  fv.user_id = user.user_id;
  for (const auto& name : schema.names) {
    auto it = available.find(name);
    if (it == available.end()) {
      throw DataError("schema '" + schema.version + "' names unknown feature '" + name + "'");
    }
    fv.values.push_back(it->second.value_or(kMissing));
    fv.missing.push_back(!it->second.has_value());
  }
  return fv;
}

inline Matrix to_matrix(std::span<const FeatureVector> vectors) {
  Matrix m;
  for (const auto& v : vectors) m.append_row(v.values);
  return m;
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-feature imputation value (training median), mean and population std
/// (computed after imputation). A std of exactly 0 marks a pass-through
/// feature.
struct StandardizationStats {
  std::vector<double> impute;
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t size() const { return mean.size(); }
  friend bool operator==(const StandardizationStats&, const StandardizationStats&) = default;
};

/// Throws DataError naming the feature if a column is entirely missing.
inline StandardizationStats fit_standardization(const Matrix& train,
                                                std::span<const std::string> names = {}) {
  if (train.rows() == 0) throw DataError("cannot fit standardization on an empty matrix");
  StandardizationStats stats;
  for (std::size_t c = 0; c < train.cols(); ++c) {
    std::vector<double> present;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      if (!is_missing(train(r, c))) present.push_back(train(r, c));
    }
    if (present.empty()) {
      std::string name = c < names.size() ? names[c] : "#" + std::to_string(c);
      throw DataError("feature '" + name + "' is missing for every training row");
    }
    double fill = median(present);
    std::vector<double> column;
    column.reserve(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) {
      column.push_back(is_missing(train(r, c)) ? fill : train(r, c));
    }
    Moments m = population_moments(column);
    if (m.std <= 1e-12 * std::max(1.0, std::abs(m.mean))) m.std = 0.0;
    stats.impute.push_back(fill);
    stats.mean.push_back(m.mean);
    stats.std.push_back(m.std);
  }
  return stats;
}

inline Matrix apply_standardization(const Matrix& x, const StandardizationStats& stats) {
  if (x.cols() != stats.size() && x.rows() > 0) {
    throw DataError("matrix has " + std::to_string(x.cols()) +
                    " columns; standardization expects " + std::to_string(stats.size()));
  }
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      double v = is_missing(out(r, c)) ? stats.impute[c] : out(r, c);
      if (stats.std[c] > 0) v = (v - stats.mean[c]) / stats.std[c];
      out(r, c) = v;
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const StandardizationStats& s) {
  return {{"impute", s.impute}, {"mean", s.mean}, {"std", s.std}};
}

inline StandardizationStats standardization_from_json(const nlohmann::json& j) {
  StandardizationStats s;
  s.impute = j.at("impute").get<std::vector<double>>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  if (s.impute.size() != s.mean.size() || s.mean.size() != s.std.size()) {
    throw DataError("standardization stats have inconsistent lengths");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Per-class distribution summaries
// ---------------------------------------------------------------------------

inline constexpr std::size_t kHistogramBins = 20;

struct ClassHistogram {
  std::vector<std::size_t> counts;  // kHistogramBins entries
  std::size_t n = 0;
  std::size_t missing = 0;
  std::optional<double> mean;
  std::optional<double> median;
};

struct FeatureDistribution {
  std::string feature;
  std::vector<double> edges;  // kHistogramBins + 1 entries
  ClassHistogram non_bot;
  ClassHistogram bot;
};

/// Histograms over 20 equal-width bins spanning the pooled min..max of each
/// feature (a constant feature gets the unit-width range [v, v + 1]). The last
/// bin is closed on the right. Rows whose label is neither bot nor non-bot
/// are ignored.
inline std::vector<FeatureDistribution> class_distributions(const Matrix& x,
                                                            std::span<const Label> labels,
                                                            std::span<const std::string> names) {
  if (labels.size() != x.rows()) throw DataError("label count does not match feature rows");
  if (names.size() != x.cols()) throw DataError("feature name count does not match columns");
  std::vector<FeatureDistribution> out;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    FeatureDistribution d;
    d.feature = names[c];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (!is_binary(labels[r]) || is_missing(x(r, c))) continue;
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi == lo) hi = lo + 1.0;
    double width = (hi - lo) / double(kHistogramBins);
    for (std::size_t b = 0; b <= kHistogramBins; ++b) {
      d.edges.push_back(b == kHistogramBins ? hi : lo + width * double(b));
    }
    for (auto* h : {&d.non_bot, &d.bot}) h->counts.assign(kHistogramBins, 0);
    std::vector<double> values_nb, values_b;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (!is_binary(labels[r])) continue;
      ClassHistogram& h = labels[r] == Label::bot ? d.bot : d.non_bot;
      ++h.n;
      double v = x(r, c);
      if (is_missing(v)) {
        ++h.missing;
        continue;
      }
      auto bin = std::size_t((v - lo) / width);
      if (bin >= kHistogramBins) bin = kHistogramBins - 1;
      ++h.counts[bin];
      (labels[r] == Label::bot ? values_b : values_nb).push_back(v);
    }
    for (auto [h, values] : {std::pair{&d.non_bot, &values_nb}, std::pair{&d.bot, &values_b}}) {
      if (values->empty()) continue;
      h->mean = population_moments(*values).mean;
      h->median = median(*values);
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const std::vector<FeatureDistribution>& dists) {
  auto histogram = [](const ClassHistogram& h) {
    nlohmann::ordered_json j;
    j["n"] = h.n;
    j["missing"] = h.missing;
    j["counts"] = h.counts;
    j["mean"] = h.mean ? nlohmann::ordered_json(*h.mean) : nlohmann::ordered_json(nullptr);
    j["median"] = h.median ? nlohmann::ordered_json(*h.median) : nlohmann::ordered_json(nullptr);
    return j;
  };
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& d : dists) {
    j[d.feature] = {{"edges", d.edges},
                    {"non_bot", histogram(d.non_bot)},
                    {"bot", histogram(d.bot)}};
  }
  return j;
}

}  // namespace botscreen
