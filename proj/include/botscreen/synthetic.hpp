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

/// @file synthetic.hpp
/// Seeded generator of labeled cohorts with planted class-conditional
/// behavior (repetition, links, posting rate, topical focus, profile names
/// and faces) plus a synthetic bot score per user.
///
/// Config file (TOML):
///
///     [synthetic]
///     n_bot = 250
///     n_nonbot = 4750
///     seed = 7
///
///     [bot]
///     duplicate_prob = 0.45
///     url_prob = 0.7
///     ...
///
///     [nonbot]
///     ...

#include <string>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/corpus.hpp"
#include "toml.hpp"

namespace botscreen {

/// Behavior of one class. Probabilities are in [0,1]; rates are positive.
struct ClassBehavior {
  double duplicate_prob = 0.0;  // a tweet repeats an earlier one verbatim
  double url_prob = 0.0;        // a fresh tweet carries a link
  double daily_rate_mean = 1.0;
  /// Gamma-Poisson dispersion of the per-user daily rate; 0 means every user
  /// of the class posts at exactly daily_rate_mean.
  double daily_rate_dispersion = 0.0;
  double face_prob = 0.0;  // profile picture shows at least one face
  double name_prob = 0.0;  // display name is a personal name
  /// Relative preference for each planted topic.
  std::vector<double> topic_bias{1, 1, 1, 1, 1};
  /// Concentration of the per-user topic mixture around topic_bias; small
  /// values give users focused on one or two topics.
  double topic_concentration = 5.0;
  int words_min = 5;
  int words_max = 15;
  /// Synthetic bot score ~ Beta with this mean and concentration.
  double score_mean = 0.5;
  double score_concentration = 4.0;
};

struct SyntheticConfig {
  std::size_t n_bot = 20;
  std::size_t n_nonbot = 480;
  ClassBehavior bot;
  ClassBehavior nonbot;
  std::uint64_t seed = 0;
  int active_days_min = 7;
  int active_days_max = 21;
  std::size_t max_tweets_per_user = 300;
  std::size_t words_per_topic = 40;
  Timestamp start = 1546300800;  // 2019-01-01T00:00:00Z

  void validate() const;
};

inline ClassBehavior default_bot_behavior() {
  ClassBehavior b;
  b.duplicate_prob = 0.45;
  b.url_prob = 0.7;
  b.daily_rate_mean = 6.0;
  b.daily_rate_dispersion = 0.5;
  b.face_prob = 0.6;
  b.name_prob = 0.1;
  b.topic_bias = {6, 1, 1, 1, 1};
  b.topic_concentration = 0.5;
  b.words_min = 10;
  b.words_max = 16;
  b.score_mean = 0.42;
  b.score_concentration = 5.0;
  return b;
}

inline ClassBehavior default_nonbot_behavior() {
  ClassBehavior b;
  b.duplicate_prob = 0.03;
  b.url_prob = 0.15;
  b.daily_rate_mean = 1.5;
  b.daily_rate_dispersion = 0.8;
  b.face_prob = 0.3;
  b.name_prob = 0.5;
  b.topic_bias = {1, 2, 2, 2, 2};
  b.topic_concentration = 5.0;
  b.words_min = 3;
  b.words_max = 20;
  b.score_mean = 0.3;
  b.score_concentration = 5.0;
  return b;
}

inline SyntheticConfig default_synthetic_config() {
  SyntheticConfig c;
  c.bot = default_bot_behavior();
  c.nonbot = default_nonbot_behavior();
  return c;
}

namespace detail {

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw UsageError(std::string(name) + " must lie in [0, 1]");
  }
}

inline void validate_behavior(const ClassBehavior& b) {
  check_probability(b.duplicate_prob, "duplicate_prob");
  check_probability(b.url_prob, "url_prob");
  check_probability(b.face_prob, "face_prob");
  check_probability(b.name_prob, "name_prob");
  check_probability(b.score_mean, "score_mean");
  if (!(b.daily_rate_mean > 0)) throw UsageError("daily_rate_mean must be > 0");
  if (!(b.daily_rate_dispersion >= 0)) throw UsageError("daily_rate_dispersion must be >= 0");
  if (!(b.topic_concentration > 0)) throw UsageError("topic_concentration must be > 0");
  if (!(b.score_concentration > 0)) throw UsageError("score_concentration must be > 0");
  if (b.words_min < 1 || b.words_max < b.words_min) {
    throw UsageError("words_min/words_max must satisfy 1 <= min <= max");
  }
  double total = 0;
  for (double w : b.topic_bias) {
    if (!(w >= 0)) throw UsageError("topic_bias entries must be >= 0");
    total += w;
  }
  if (b.topic_bias.empty() || !(total > 0)) {
    throw UsageError("topic_bias needs at least one positive entry");
  }
}

// Vocabulary for the org-style (non-personal) profile names; none of these
// is a given name.
inline constexpr std::array<const char*, 24> kOrgWords = {
    "Baby",   "Bump",    "Deals",    "Shop",     "Daily",   "Health",
    "News",   "Tips",    "Care",     "Store",    "Club",    "Forum",
    "Official", "Market", "Hub",     "Central",  "Express", "Boutique",
    "Wellness", "Nursery", "Promo",  "Outlet",   "Bargain", "Mama"};

inline constexpr std::array<const char*, 20> kFirstNames = {
    "Emily", "John",    "Sarah",  "Michael", "Jessica", "David",  "Ashley",
    "James", "Amanda",  "Robert", "Olivia",  "Daniel",  "Hannah", "Megan",
    "Kevin", "Rachel",  "Laura",  "Brian",   "Nicole",  "Samuel"};

inline constexpr std::array<const char*, 12> kSurnames = {
    "Smith", "Garcia", "Miller", "Lopez", "Wilson", "Moore",
    "Clark", "Lewis",  "Walker", "Young", "Hill",   "Baker"};

/// Deterministic consonant-vowel pseudo-word, unique per index.
inline std::string planted_word(std::size_t index) {
  static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::string word;
  std::size_t x = index;
  for (int syllable = 0; syllable < 3; ++syllable) {
    word.push_back(kConsonants[x % kConsonants.size()]);
    x /= kConsonants.size();
    word.push_back(kVowels[x % kVowels.size()]);
    x /= kVowels.size();
  }
  return word;
}

inline constexpr std::array<const char*, 16> kFillerWords = {
    "the", "and", "to", "of", "for", "is", "in", "my", "this", "with",
    "on", "it", "at", "so", "be", "just"};

inline std::string random_token(Rng& rng, std::size_t length) {
  static constexpr std::string_view kChars =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string out;
  for (std::size_t i = 0; i < length; ++i) out.push_back(kChars[rng.below(kChars.size())]);
  return out;
}

}  // namespace detail

inline void SyntheticConfig::validate() const {
  if (n_bot + n_nonbot == 0) {
    throw UsageError("synthetic cohort is empty: n_bot + n_nonbot must be > 0");
  }
  detail::validate_behavior(bot);
  detail::validate_behavior(nonbot);
  if (active_days_min < 1 || active_days_max < active_days_min) {
    throw UsageError("active_days_min/max must satisfy 1 <= min <= max");
  }
  if (max_tweets_per_user < 1) throw UsageError("max_tweets_per_user must be >= 1");
  if (words_per_topic < 1) throw UsageError("words_per_topic must be >= 1");
}

/// A generated cohort plus one synthetic bot score per user, aligned with
/// cohort.users().
struct SyntheticCohort {
  Cohort cohort;
  std::vector<double> scores;
};

/// Planted vocabulary of topic t (words_per_topic distinct pseudo-words).
inline std::vector<std::string> planted_topic_words(std::size_t topic,
                                                    std::size_t words_per_topic) {
  std::vector<std::string> words;
  for (std::size_t j = 0; j < words_per_topic; ++j) {
    words.push_back(detail::planted_word(topic * words_per_topic + j));
  }
  return words;
}

inline SyntheticCohort generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::vector<Label> labels(config.n_bot, Label::bot);
  labels.insert(labels.end(), config.n_nonbot, Label::non_bot);
  Rng order_rng(substream_seed(config.seed, 0));
  order_rng.shuffle(labels);

  std::size_t n_topics =
      std::max(config.bot.topic_bias.size(), config.nonbot.topic_bias.size());
  std::vector<std::vector<std::string>> vocab;
  for (std::size_t t = 0; t < n_topics; ++t) {
    vocab.push_back(planted_topic_words(t, config.words_per_topic));
  }

  SyntheticCohort out;
  out.scores.reserve(labels.size());
  for (std::size_t u = 0; u < labels.size(); ++u) {
    const ClassBehavior& b = labels[u] == Label::bot ? config.bot : config.nonbot;
    Rng rng(substream_seed(config.seed, u + 1));
    char id[32];
    std::snprintf(id, sizeof id, "u%06zu", u);

    UserRecord user;
    user.user_id = id;
    user.label = labels[u];
    if (rng.bernoulli(b.name_prob)) {
      std::string first = detail::kFirstNames[rng.below(detail::kFirstNames.size())];
      std::string last = detail::kSurnames[rng.below(detail::kSurnames.size())];
      user.display_name = first + " " + last;
      user.screen_name = first + last.substr(0, 1) + std::to_string(rng.between(10, 99));
    } else {
      std::string a = detail::kOrgWords[rng.below(detail::kOrgWords.size())];
      std::string c = detail::kOrgWords[rng.below(detail::kOrgWords.size())];
      user.display_name = a + " " + c;
      user.screen_name = a + c + std::to_string(rng.between(1, 999));
    }
    user.face_count = rng.bernoulli(b.face_prob) ? (rng.bernoulli(0.2) ? 2 : 1) : 0;
    out.scores.push_back(rng.beta(b.score_mean * b.score_concentration + 1e-9,
                                  (1.0 - b.score_mean) * b.score_concentration + 1e-9));

    // Per-user topic mixture ~ Dirichlet(concentration * normalized bias).
    double bias_total = 0;
    for (double w : b.topic_bias) bias_total += w;
    std::vector<double> mixture(n_topics, 0.0);
    double mix_total = 0;
    for (std::size_t t = 0; t < b.topic_bias.size(); ++t) {
      if (b.topic_bias[t] <= 0) continue;
      mixture[t] = rng.gamma(b.topic_concentration * b.topic_bias[t] / bias_total) + 1e-300;
      mix_total += mixture[t];
    }
    auto draw_topic = [&]() {
      double r = rng.uniform() * mix_total;
      for (std::size_t t = 0; t < n_topics; ++t) {
        if (r < mixture[t]) return t;
        r -= mixture[t];
      }
      for (std::size_t t = n_topics; t-- > 0;) {
        if (mixture[t] > 0) return t;
      }
      return std::size_t{0};
    };

    double rate = b.daily_rate_mean;
    if (b.daily_rate_dispersion > 0) {
      double shape = 1.0 / b.daily_rate_dispersion;
      rate = rng.gamma(shape) * b.daily_rate_mean / shape;
    }
    int days = int(rng.between(config.active_days_min, config.active_days_max));
    Timestamp first_day = config.start + rng.between(0, 30) * kSecondsPerDay;

    std::vector<Tweet> tweets;
    for (int d = 0; d < days && tweets.size() < config.max_tweets_per_user; ++d) {
      std::int64_t count = rng.poisson(rate);
      for (std::int64_t k = 0; k < count && tweets.size() < config.max_tweets_per_user; ++k) {
        Tweet t;
        t.user_id = user.user_id;
        t.tweet_id = user.user_id + "-" + std::to_string(tweets.size());
        t.created_at = first_day + d * kSecondsPerDay + rng.between(0, kSecondsPerDay - 1);
        tweets.push_back(std::move(t));
      }
    }
    if (tweets.empty()) {
      Tweet t;
      t.user_id = user.user_id;
      t.tweet_id = user.user_id + "-0";
      t.created_at = first_day + rng.between(0, kSecondsPerDay - 1);
      tweets.push_back(std::move(t));
    }
    std::sort(tweets.begin(), tweets.end(), tweet_before);
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      if (i > 0 && rng.bernoulli(b.duplicate_prob)) {
        tweets[i].text = tweets[rng.below(i)].text;
        continue;
      }
      const auto& words = vocab[draw_topic()];
      auto n_words = rng.between(b.words_min, b.words_max);
      std::string text;
      for (std::int64_t w = 0; w < n_words; ++w) {
        if (!text.empty()) text.push_back(' ');
        if (rng.bernoulli(0.7)) {
          text += words[rng.below(words.size())];
        } else {
          text += detail::kFillerWords[rng.below(detail::kFillerWords.size())];
        }
      }
      if (rng.bernoulli(b.url_prob)) text += " https://t.co/" + detail::random_token(rng, 8);
      tweets[i].text = std::move(text);
    }

    out.cohort.add_user(std::move(user));
    for (auto& t : tweets) out.cohort.attach(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// TOML configuration
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void read_number(const toml::table& table, const char* key, T& target) {
  const toml::node* node = table.get(key);
  if (!node) return;
  if constexpr (std::is_floating_point_v<T>) {
    if (auto v = node->value<double>()) {
      target = *v;
      return;
    }
  } else {
    if (auto v = node->value<std::int64_t>()) {
      if (*v < 0 && std::is_unsigned_v<T>) {
        throw UsageError(std::string("'") + key + "' must be non-negative");
      }
      target = T(*v);
      return;
    }
  }
  throw UsageError(std::string("'") + key + "' has the wrong type");
}

inline void read_behavior(const toml::table& table, ClassBehavior& b) {
  read_number(table, "duplicate_prob", b.duplicate_prob);
  read_number(table, "url_prob", b.url_prob);
  read_number(table, "daily_rate_mean", b.daily_rate_mean);
  read_number(table, "daily_rate_dispersion", b.daily_rate_dispersion);
  read_number(table, "face_prob", b.face_prob);
  read_number(table, "name_prob", b.name_prob);
  read_number(table, "topic_concentration", b.topic_concentration);
  read_number(table, "words_min", b.words_min);
  read_number(table, "words_max", b.words_max);
  read_number(table, "score_mean", b.score_mean);
  read_number(table, "score_concentration", b.score_concentration);
  if (const toml::array* bias = table["topic_bias"].as_array()) {
    b.topic_bias.clear();
    for (const auto& item : *bias) {
      auto v = item.value<double>();
      if (!v) throw UsageError("topic_bias must be an array of numbers");
      b.topic_bias.push_back(*v);
    }
  }
}

}  // namespace detail

/// Reads [synthetic], [bot] and [nonbot] from a parsed TOML document on top
/// of the default configuration.
inline SyntheticConfig synthetic_config_from_toml(const toml::table& doc) {
  SyntheticConfig c = default_synthetic_config();
  if (const toml::table* s = doc["synthetic"].as_table()) {
    detail::read_number(*s, "n_bot", c.n_bot);
    detail::read_number(*s, "n_nonbot", c.n_nonbot);
    detail::read_number(*s, "seed", c.seed);
    detail::read_number(*s, "active_days_min", c.active_days_min);
    detail::read_number(*s, "active_days_max", c.active_days_max);
    detail::read_number(*s, "max_tweets_per_user", c.max_tweets_per_user);
    detail::read_number(*s, "words_per_topic", c.words_per_topic);
    if (auto start = (*s)["start"].value<std::string>()) {
      auto ts = parse_timestamp(*start);
      if (!ts) throw UsageError("synthetic.start must be YYYY-MM-DDThh:mm:ssZ");
      c.start = *ts;
    }
  }
  if (const toml::table* t = doc["bot"].as_table()) detail::read_behavior(*t, c.bot);
  if (const toml::table* t = doc["nonbot"].as_table()) detail::read_behavior(*t, c.nonbot);
  c.validate();
  return c;
}

inline SyntheticConfig load_synthetic_config(const std::string& path) {
  try {
    return synthetic_config_from_toml(toml::parse_file(path));
  } catch (const toml::parse_error& e) {
    throw UsageError("cannot parse '" + path + "': " + std::string(e.description()));
  }
}

}  // namespace botscreen
