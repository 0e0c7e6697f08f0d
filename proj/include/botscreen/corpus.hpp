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

/// @file corpus.hpp
/// Cohort data model, JSONL ingestion/serialization and stratified
/// train/test splitting.
///
/// users.jsonl:  {"user_id", "screen_name", "display_name": str|null,
///                "face_count": int|null, "label": "bot"|"non-bot"|
///                "unavailable"|null}
/// tweets.jsonl: {"tweet_id", "user_id", "text",
///                "created_at": "YYYY-MM-DDThh:mm:ssZ"}

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "botscreen/core.hpp"
#include "json.hpp"

namespace botscreen {

struct Tweet {
  std::string tweet_id;
  std::string user_id;
  std::string text;
  Timestamp created_at = 0;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

struct UserRecord {
  std::string user_id;
  std::string screen_name;
  std::optional<std::string> display_name;
  std::optional<std::int64_t> face_count;
  Label label = Label::unlabeled;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

/// Chronological order with tweet_id as tie-break.
inline bool tweet_before(const Tweet& a, const Tweet& b) {
  if (a.created_at != b.created_at) return a.created_at < b.created_at;
  return a.tweet_id < b.tweet_id;
}

/// Users plus their tweets. tweets[i] belongs to users[i] and is kept sorted
/// by tweet_before.
class Cohort {
 public:
  const std::vector<UserRecord>& users() const { return users_; }
  const std::vector<Tweet>& tweets_of(std::size_t user_index) const {
    return tweets_[user_index];
  }
  std::size_t size() const { return users_.size(); }
  bool empty() const { return users_.empty(); }

  std::optional<std::size_t> find(const std::string& user_id) const {
    auto it = index_.find(user_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Throws DataError if the id is already present or face_count < 0.
  void add_user(UserRecord user) {
    if (user.face_count && *user.face_count < 0) {
      throw DataError("user '" + user.user_id + "' has negative face_count");
    }
    if (!index_.emplace(user.user_id, users_.size()).second) {
      throw DataError("duplicate user_id '" + user.user_id + "'");
    }
    users_.push_back(std::move(user));
    tweets_.emplace_back();
  }

  /// Attaches a tweet to its owner, keeping the per-user order. Returns false
  /// when the owner is not in the cohort. Throws on a repeated tweet_id.
  bool attach(Tweet tweet) {
    auto owner = find(tweet.user_id);
    if (!owner) return false;
    if (!tweet_ids_.insert(tweet.tweet_id).second) {
      throw DataError("duplicate tweet_id '" + tweet.tweet_id + "'");
    }
    auto& list = tweets_[*owner];
    auto pos = std::upper_bound(list.begin(), list.end(), tweet, tweet_before);
    list.insert(pos, std::move(tweet));
    return true;
  }

  std::size_t tweet_count() const { return tweet_ids_.size(); }

  /// Sub-cohort of the given user indices (with their tweets), in that order.
  Cohort subset(std::span<const std::size_t> indices) const {
    Cohort out;
    for (std::size_t i : indices) {
      out.add_user(users_[i]);
      for (const Tweet& t : tweets_[i]) out.attach(t);
    }
    return out;
  }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(users_.size());
    for (const auto& u : users_) out.push_back(u.label);
    return out;
  }

 private:
  std::vector<UserRecord> users_;
  std::vector<std::vector<Tweet>> tweets_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::string> tweet_ids_;
};

// ---------------------------------------------------------------------------
// JSONL ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::string line_error(const std::string& source, std::size_t line,
                              const std::string& what) {
  return source + ":" + std::to_string(line) + ": " + what;
}

inline const nlohmann::json& require(const nlohmann::json& obj,
                                     const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline UserRecord user_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  UserRecord user;
  user.user_id = require_string(j, "user_id");
  user.screen_name = require_string(j, "screen_name");
  if (auto it = j.find("display_name"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("field 'display_name' must be a string or null");
    user.display_name = it->get<std::string>();
  }
  if (auto it = j.find("face_count"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw DataError("field 'face_count' must be an integer or null");
    user.face_count = it->get<std::int64_t>();
    if (*user.face_count < 0) throw DataError("field 'face_count' must be >= 0");
  }
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("field 'label' must be a string or null");
    auto label = parse_label(it->get<std::string>());
    if (!label) throw DataError("unknown label '" + it->get<std::string>() + "'");
    user.label = *label;
  }
  return user;
}

inline Tweet tweet_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  Tweet tweet;
  tweet.tweet_id = require_string(j, "tweet_id");
  tweet.user_id = require_string(j, "user_id");
  tweet.text = require_string(j, "text");
  std::string when = require_string(j, "created_at");
  auto ts = parse_timestamp(when);
  if (!ts) throw DataError("unparseable created_at '" + when + "'");
  tweet.created_at = *ts;
  return tweet;
}

template <typename Fn>
void for_each_jsonl(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(line_error(source, number, e.what()));
    } catch (const DataError& e) {
      throw DataError(line_error(source, number, e.what()));
    }
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

inline Cohort read_users(std::istream& in, const std::string& source = "users") {
  Cohort cohort;
  detail::for_each_jsonl(in, source, [&](const nlohmann::json& j) {
    cohort.add_user(detail::user_from_json(j));
  });
  return cohort;
}

/// Loads users.jsonl. Errors name the offending line (or duplicate id).
inline Cohort load_users(const std::string& path) {
  auto in = detail::open_input(path);
  return read_users(in, path);
}

struct TweetLoadReport {
  std::size_t attached = 0;
  std::size_t orphans = 0;  // tweets whose user_id is not in the cohort
};

inline TweetLoadReport read_tweets(std::istream& in, Cohort& cohort,
                                   const std::string& source = "tweets") {
  TweetLoadReport report;
  detail::for_each_jsonl(in, source, [&](const nlohmann::json& j) {
    if (cohort.attach(detail::tweet_from_json(j))) {
      ++report.attached;
    } else {
      ++report.orphans;
    }
  });
  return report;
}

inline TweetLoadReport load_tweets(const std::string& path, Cohort& cohort) {
  auto in = detail::open_input(path);
  return read_tweets(in, cohort, path);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const UserRecord& user) {
  nlohmann::ordered_json j;
  j["user_id"] = user.user_id;
  j["screen_name"] = user.screen_name;
  j["display_name"] = user.display_name ? nlohmann::ordered_json(*user.display_name)
                                        : nlohmann::ordered_json(nullptr);
  j["face_count"] = user.face_count ? nlohmann::ordered_json(*user.face_count)
                                    : nlohmann::ordered_json(nullptr);
  j["label"] = user.label == Label::unlabeled
                   ? nlohmann::ordered_json(nullptr)
                   : nlohmann::ordered_json(std::string(to_string(user.label)));
  return j;
}

inline nlohmann::ordered_json to_json(const Tweet& tweet) {
  nlohmann::ordered_json j;
  j["tweet_id"] = tweet.tweet_id;
  j["user_id"] = tweet.user_id;
  j["text"] = tweet.text;
  j["created_at"] = format_timestamp(tweet.created_at);
  return j;
}

inline void write_users(std::ostream& out, const Cohort& cohort) {
  for (const auto& u : cohort.users()) out << to_json(u).dump() << '\n';
}

/// Tweets grouped by user in cohort order, each group chronological.
inline void write_tweets(std::ostream& out, const Cohort& cohort) {
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    for (const auto& t : cohort.tweets_of(i)) out << to_json(t).dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Users labeled bot or non-bot, in original order.
inline Cohort filter_labeled(const Cohort& cohort) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    if (is_binary(cohort.users()[i].label)) keep.push_back(i);
  }
  return cohort.subset(keep);
}

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw UsageError("train_fraction must lie in (0, 1)");
    }
  }
};

/// Per-class training quotas. The overall training size is
/// round-half-up(f * N); it is apportioned to classes by largest remainder of
/// f * n_c, ties going to the class listed first (bot before non-bot). Each
/// quota therefore differs from f * n_c by less than one user.
inline std::vector<std::size_t> train_quotas(std::span<const std::size_t> class_counts,
                                             double train_fraction) {
  std::size_t total = 0;
  for (std::size_t n : class_counts) total += n;
  auto target = std::size_t(std::floor(train_fraction * double(total) + 0.5));
  std::vector<std::size_t> quota(class_counts.size());
  std::vector<double> remainder(class_counts.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    double exact = train_fraction * double(class_counts[c]);
    quota[c] = std::size_t(std::floor(exact));
    remainder[c] = exact - double(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(class_counts.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    std::size_t c = order[k];
    if (quota[c] < class_counts[c]) {
      ++quota[c];
      ++assigned;
    }
  }
  return quota;
}

/// Stratified train/test membership over a label sequence. Only bot and
/// non-bot labels are accepted. Deterministic for fixed (labels, spec).
inline std::vector<bool> stratified_membership(std::span<const Label> labels,
                                               const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> bots, non_bots;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::bot) {
      bots.push_back(i);
    } else if (labels[i] == Label::non_bot) {
      non_bots.push_back(i);
    } else {
      throw DataError("cannot split: row " + std::to_string(i) + " is labeled '" +
                      std::string(to_string(labels[i])) +
                      "'; filter to bot/non-bot users first");
    }
  }
  std::array<std::size_t, 2> counts{bots.size(), non_bots.size()};
  auto quota = train_quotas(counts, spec.train_fraction);
  std::vector<bool> in_train(labels.size(), false);
  Rng rng(spec.seed);
  std::size_t c = 0;
  for (auto* members : {&bots, &non_bots}) {
    rng.shuffle(*members);
    for (std::size_t k = 0; k < quota[c]; ++k) in_train[(*members)[k]] = true;
    ++c;
  }
  return in_train;
}

struct CohortSplit {
  Cohort train;
  Cohort test;
};

/// Both halves keep the cohort's user order.
inline CohortSplit stratified_split(const Cohort& cohort, const SplitSpec& spec) {
  auto labels = cohort.labels();
  auto in_train = stratified_membership(labels, spec);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < in_train.size(); ++i) {
    (in_train[i] ? train : test).push_back(i);
  }
  return {cohort.subset(train), cohort.subset(test)};
}

}  // namespace botscreen
