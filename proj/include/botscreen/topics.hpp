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

/// @file topics.hpp
/// Latent Dirichlet Allocation over tweets (one tweet = one document),
/// fitted by collapsed Gibbs sampling, and per-user mean topic weights.

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/corpus.hpp"
#include "botscreen/lexicon.hpp"
#include "botscreen/text.hpp"
#include "json.hpp"

namespace botscreen {

using TokenList = std::vector<std::string>;

/// Lowercases, removes URL spans and @-mentions, splits on non-alphanumerics
/// and drops tokens shorter than two bytes or present in the stopword list.
inline TokenList tokenize(std::string_view input,
                          const WordSet& stopwords = bundled_stopwords()) {
  std::string cleaned(input);
  for (auto [begin, end] : text::find_urls(input)) {
    for (std::size_t i = begin; i < end; ++i) cleaned[i] = ' ';
  }
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    if (cleaned[i] != '@') continue;
    std::size_t j = i + 1;
    while (j < cleaned.size() && (text::is_word(cleaned[j]) || cleaned[j] == '_')) ++j;
    for (std::size_t k = i; k < j; ++k) cleaned[k] = ' ';
    i = j - 1;
  }
  cleaned = text::lowercase(cleaned);
  TokenList tokens;
  for (auto run : text::split_alnum(cleaned)) {
    if (run.size() < 2) continue;
    std::string token(run);
    if (stopwords.contains(token)) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

inline constexpr std::size_t kRecentTweetCap = 1000;

/// The last min(n, cap) tweets of a chronologically sorted sequence.
inline std::span<const Tweet> select_recent(std::span<const Tweet> tweets,
                                            std::size_t cap = kRecentTweetCap) {
  if (tweets.size() <= cap) return tweets;
  return tweets.subspan(tweets.size() - cap);
}

struct LdaParams {
  std::size_t topics = 5;
  /// Symmetric document-topic prior; nullopt means 50 / topics.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::size_t min_document_frequency = 2;

  double resolved_alpha() const { return alpha.value_or(50.0 / double(topics)); }
};

/// Fitted topic model. phi is row-major topics x vocabulary; the vocabulary
/// is sorted.
struct TopicModel {
  std::size_t topics = 0;
  std::vector<std::string> vocabulary;
  std::vector<double> phi;
  double alpha = 0;
  double beta = 0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;

  std::size_t vocab_size() const { return vocabulary.size(); }
  double word_prob(std::size_t topic, std::size_t word) const {
    return phi[topic * vocabulary.size() + word];
  }
  /// Position of a token in the (sorted) vocabulary.
  std::optional<std::size_t> word_id(const std::string& token) const {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
    if (it == vocabulary.end() || *it != token) return std::nullopt;
    return std::size_t(it - vocabulary.begin());
  }
};

/// Sorted vocabulary of tokens occurring in at least `min_df` documents.
inline std::vector<std::string> build_vocabulary(std::span<const TokenList> docs,
                                                 std::size_t min_df) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> unique(doc.begin(), doc.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& w : unique) ++df[w];
  }
  std::vector<std::string> vocab;
  for (const auto& [word, count] : df) {
    if (count >= min_df) vocab.push_back(word);
  }
  return vocab;
}

/// Collapsed Gibbs sampler state. Documents are word-id sequences; each token
/// carries exactly one topic assignment at all times.
class LdaSampler {
 public:
  LdaSampler(std::vector<std::vector<std::size_t>> docs, std::size_t vocab_size,
             std::size_t topics, double alpha, double beta, std::uint64_t seed)
      : docs_(std::move(docs)),
        vocab_size_(vocab_size),
        topics_(topics),
        alpha_(alpha),
        beta_(beta),
        rng_(seed),
        doc_topic_(docs_.size() * topics, 0),
        topic_word_(topics * vocab_size, 0),
        topic_total_(topics, 0),
        weights_(topics, 0.0) {
    assignments_.resize(docs_.size());
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      assignments_[d].resize(docs_[d].size());
      for (std::size_t i = 0; i < docs_[d].size(); ++i) {
        auto k = std::size_t(rng_.below(topics_));
        assignments_[d][i] = k;
        add(d, docs_[d][i], k);
        ++tokens_;
      }
    }
  }

  /// One full pass resampling every token's topic.
  void sweep() {
    const double vbeta = double(vocab_size_) * beta_;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      for (std::size_t i = 0; i < docs_[d].size(); ++i) {
        std::size_t w = docs_[d][i];
        std::size_t old = assignments_[d][i];
        remove(d, w, old);
        double total = 0.0;
        for (std::size_t k = 0; k < topics_; ++k) {
          total += (double(doc_topic_[d * topics_ + k]) + alpha_) *
                   (double(topic_word_[k * vocab_size_ + w]) + beta_) /
                   (double(topic_total_[k]) + vbeta);
          weights_[k] = total;
        }
        double r = rng_.uniform() * total;
        std::size_t k = 0;
        while (k + 1 < topics_ && weights_[k] <= r) ++k;
        assignments_[d][i] = k;
        add(d, w, k);
      }
    }
  }

  std::size_t token_count() const { return tokens_; }
  std::size_t topics() const { return topics_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<std::vector<std::size_t>>& assignments() const { return assignments_; }
  const std::vector<std::vector<std::size_t>>& documents() const { return docs_; }
  std::int64_t doc_topic(std::size_t d, std::size_t k) const { return doc_topic_[d * topics_ + k]; }
  std::int64_t topic_word(std::size_t k, std::size_t w) const {
    return topic_word_[k * vocab_size_ + w];
  }
  std::int64_t topic_total(std::size_t k) const { return topic_total_[k]; }

  /// phi[k][w] = (n_kw + beta) / (n_k + V beta), row-major.
  std::vector<double> phi() const {
    std::vector<double> out(topics_ * vocab_size_);
    const double vbeta = double(vocab_size_) * beta_;
    for (std::size_t k = 0; k < topics_; ++k) {
      for (std::size_t w = 0; w < vocab_size_; ++w) {
        out[k * vocab_size_ + w] =
            (double(topic_word_[k * vocab_size_ + w]) + beta_) / (double(topic_total_[k]) + vbeta);
      }
    }
    return out;
  }

 private:
  void add(std::size_t d, std::size_t w, std::size_t k) {
    ++doc_topic_[d * topics_ + k];
    ++topic_word_[k * vocab_size_ + w];
    ++topic_total_[k];
  }
  void remove(std::size_t d, std::size_t w, std::size_t k) {
    --doc_topic_[d * topics_ + k];
    --topic_word_[k * vocab_size_ + w];
    --topic_total_[k];
  }

  std::vector<std::vector<std::size_t>> docs_;
  std::vector<std::vector<std::size_t>> assignments_;
  std::size_t vocab_size_;
  std::size_t topics_;
  double alpha_;
  double beta_;
  Rng rng_;
  std::vector<std::int64_t> doc_topic_;
  std::vector<std::int64_t> topic_word_;
  std::vector<std::int64_t> topic_total_;
  std::vector<double> weights_;
  std::size_t tokens_ = 0;
};

/// Encodes documents against a vocabulary; unknown tokens are dropped and
/// documents left empty are skipped.
inline std::vector<std::vector<std::size_t>> encode_documents(
    std::span<const TokenList> docs, const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);
  std::vector<std::vector<std::size_t>> encoded;
  for (const auto& doc : docs) {
    std::vector<std::size_t> ids;
    for (const auto& token : doc) {
      if (auto it = index.find(token); it != index.end()) ids.push_back(it->second);
    }
    if (!ids.empty()) encoded.push_back(std::move(ids));
  }
  return encoded;
}

/// Optional per-sweep hook, called after every sweep with the 1-based sweep
/// number.
using SweepObserver = std::function<void(std::size_t, const LdaSampler&)>;

inline TopicModel fit_lda(std::span<const TokenList> docs, const LdaParams& params,
                          const SweepObserver& observer = {}) {
  if (params.topics < 2) throw UsageError("LDA needs at least 2 topics");
  if (!(params.beta > 0) || !(params.resolved_alpha() > 0)) {
    throw UsageError("LDA priors must be positive");
  }
  auto vocab = build_vocabulary(docs, params.min_document_frequency);
  auto encoded = encode_documents(docs, vocab);
  if (encoded.empty()) {
    throw DataError("LDA corpus is empty after tokenization and vocabulary filtering");
  }
  LdaSampler sampler(std::move(encoded), vocab.size(), params.topics, params.resolved_alpha(),
                     params.beta, params.seed);
  for (std::size_t s = 1; s <= params.iterations; ++s) {
    sampler.sweep();
    if (observer) observer(s, sampler);
  }
  TopicModel model;
  model.topics = params.topics;
  model.vocabulary = std::move(vocab);
  model.phi = sampler.phi();
  model.alpha = params.resolved_alpha();
  model.beta = params.beta;
  model.iterations = params.iterations;
  model.seed = params.seed;
  return model;
}

/// Topic mixture of one document under a fixed model: fixed-point iteration
///   theta_k <- (alpha + sum_w n_w r_wk) / (N + K alpha),
///   r_wk proportional to theta_k phi_kw,
/// from a uniform start. Tokens outside the vocabulary are ignored; a
/// document with no known tokens gets the uniform mixture.
inline std::vector<double> infer_theta(const TopicModel& model, const TokenList& doc,
                                       std::size_t max_iterations = 100,
                                       double tolerance = 1e-10) {
  const std::size_t k_count = model.topics;
  std::vector<double> theta(k_count, 1.0 / double(k_count));
  std::map<std::size_t, double> counts;
  for (const auto& token : doc) {
    if (auto id = model.word_id(token)) counts[*id] += 1.0;
  }
  if (counts.empty()) return theta;
  double n = 0;
  for (const auto& [w, c] : counts) n += c;
  std::vector<double> next(k_count);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::fill(next.begin(), next.end(), model.alpha);
    for (const auto& [w, c] : counts) {
      double norm = 0;
      for (std::size_t k = 0; k < k_count; ++k) norm += theta[k] * model.word_prob(k, w);
      for (std::size_t k = 0; k < k_count; ++k) {
        next[k] += c * theta[k] * model.word_prob(k, w) / norm;
      }
    }
    double change = 0;
    double total = n + double(k_count) * model.alpha;
    for (std::size_t k = 0; k < k_count; ++k) {
      next[k] /= total;
      change = std::max(change, std::abs(next[k] - theta[k]));
    }
    theta.swap(next);
    if (change < tolerance) break;
  }
  double sum = 0;
  for (double v : theta) sum += v;
  for (double& v : theta) v /= sum;
  return theta;
}

/// Mean per-tweet mixture over the user's most recent tweets; nullopt for a
/// user without tweets.
inline std::optional<std::vector<double>> user_topic_means(
    const TopicModel& model, std::span<const Tweet> tweets,
    const WordSet& stopwords = bundled_stopwords(), std::size_t cap = kRecentTweetCap) {
  auto recent = select_recent(tweets, cap);
  if (recent.empty()) return std::nullopt;
  std::vector<double> mean(model.topics, 0.0);
  for (const auto& t : recent) {
    auto theta = infer_theta(model, tokenize(t.text, stopwords));
    for (std::size_t k = 0; k < model.topics; ++k) mean[k] += theta[k];
  }
  for (double& v : mean) v /= double(recent.size());
  return mean;
}

/// Documents (one per tweet) from the most recent tweets of every user.
inline std::vector<TokenList> cohort_documents(const Cohort& cohort,
                                               const WordSet& stopwords = bundled_stopwords(),
                                               std::size_t cap = kRecentTweetCap) {
  std::vector<TokenList> docs;
  for (std::size_t u = 0; u < cohort.size(); ++u) {
    for (const auto& t : select_recent(cohort.tweets_of(u), cap)) {
      docs.push_back(tokenize(t.text, stopwords));
    }
  }
  return docs;
}

// ---------------------------------------------------------------------------
// lda.json
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const TopicModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "botscreen.lda.v1";
  j["topics"] = m.topics;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["iterations"] = m.iterations;
  j["seed"] = m.seed;
  j["vocabulary"] = m.vocabulary;
  j["phi"] = m.phi;
  return j;
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "botscreen.lda.v1") throw DataError("not a botscreen LDA model");
  TopicModel m;
  m.topics = j.at("topics").get<std::size_t>();
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  m.phi = j.at("phi").get<std::vector<double>>();
  if (m.topics < 2 || m.phi.size() != m.topics * m.vocabulary.size()) {
    throw DataError("LDA model dimensions are inconsistent");
  }
  if (!std::is_sorted(m.vocabulary.begin(), m.vocabulary.end())) {
    throw DataError("LDA model vocabulary must be sorted");
  }
  return m;
}

inline TopicModel load_topic_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open LDA model '" + path + "'");
  try {
    return topic_model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed LDA model '" + path + "': " + e.what());
  }
}

}  // namespace botscreen
