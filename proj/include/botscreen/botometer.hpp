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

/// @file botometer.hpp
/// Client for an external bot-score provider, the scores.jsonl cache, and
/// score thresholding with cross-validated threshold calibration.
///
/// Wire format:
///   GET {endpoint}/score?user_id=<id>
///   Authorization: Bearer <token>
///   200 -> {"user_id": "<id>", "score": <float in [0,1]>}
/// Any other status, or a transport failure, is retried with exponential
/// backoff. A 200 with an unusable body is not retried.

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/eval.hpp"
#include "httplib.h"
#include "json.hpp"

namespace botscreen {

inline constexpr const char* kTokenEnvVar = "BOTSCREEN_API_TOKEN";

enum class ScoreSource { live, cache, file };

inline std::string_view to_string(ScoreSource s) {
  switch (s) {
    case ScoreSource::live:
      return "live";
    case ScoreSource::cache:
      return "cache";
    case ScoreSource::file:
      return "file";
  }
  return "file";
}

struct BotometerScore {
  std::string user_id;
  double score = 0.0;
  Timestamp retrieved_at = 0;
  ScoreSource source = ScoreSource::file;
};

// ---------------------------------------------------------------------------
// Thresholding
// ---------------------------------------------------------------------------

struct Threshold {
  double tau = 0.47;

  explicit Threshold(double value = 0.47) : tau(value) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("threshold must lie in [0, 1]");
  }
};

/// bot iff score >= tau.
inline Label threshold_classify(double score, const Threshold& threshold) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw DataError("score " + std::to_string(score) + " lies outside [0, 1]");
  }
  return score >= threshold.tau ? Label::bot : Label::non_bot;
}

/// {0.00, 0.01, ..., 1.00}.
inline std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(double(i) / 100.0);
  return grid;
}

struct ThresholdCandidate {
  double tau = 0.0;
  std::vector<double> fold_bot_f1;
  double mean_bot_f1 = 0.0;
};

struct ThresholdCalibration {
  Threshold best;
  std::vector<ThresholdCandidate> candidates;  // ascending tau
};

/// Mean bot-class F1 of each candidate over stratified folds (each fold
/// scored on its own rows); the best candidate wins, ties going to the
/// smaller tau.
inline ThresholdCalibration calibrate_threshold(std::span<const double> scores,
                                                std::span<const Label> labels,
                                                std::size_t folds, std::vector<double> grid,
                                                std::uint64_t seed = 0) {
  if (scores.size() != labels.size()) throw DataError("score count does not match labels");
  if (grid.empty()) throw UsageError("threshold grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw DataError("calibration score outside [0, 1]");
  }
  auto fold_of = stratified_folds(labels, folds, seed);
  std::vector<std::size_t> bots_in_fold(folds, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) bots_in_fold[fold_of[i]] += labels[i] == Label::bot;
  for (std::size_t f = 0; f < folds; ++f) {
    if (bots_in_fold[f] == 0) {
      throw DataError("calibration fold " + std::to_string(f) + " has no bot users");
    }
  }
  ThresholdCalibration out{Threshold(grid.front()), {}};
  std::size_t best = 0;
  for (double tau : grid) {
    Threshold t(tau);
    ThresholdCandidate cand;
    cand.tau = tau;
    std::vector<ConfusionMatrix> cms(folds);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      bool actual = labels[i] == Label::bot;
      bool guess = threshold_classify(scores[i], t) == Label::bot;
      auto& cm = cms[fold_of[i]];
      if (actual && guess) ++cm.tp;
      else if (guess) ++cm.fp;
      else if (actual) ++cm.fn;
      else ++cm.tn;
    }
    for (const auto& cm : cms) {
      cand.fold_bot_f1.push_back(metrics(cm).bot.f1);
      cand.mean_bot_f1 += cand.fold_bot_f1.back();
    }
    cand.mean_bot_f1 /= double(folds);
    out.candidates.push_back(std::move(cand));
    if (out.candidates.back().mean_bot_f1 > out.candidates[best].mean_bot_f1) {
      best = out.candidates.size() - 1;
    }
  }
  out.best = Threshold(out.candidates[best].tau);
  return out;
}

inline nlohmann::ordered_json to_json(const ThresholdCalibration& c) {
  nlohmann::ordered_json j;
  j["selected_tau"] = c.best.tau;
  j["criterion"] = "mean_bot_f1";
  auto cands = nlohmann::ordered_json::array();
  for (const auto& cand : c.candidates) {
    cands.push_back({{"tau", cand.tau},
                     {"fold_bot_f1", cand.fold_bot_f1},
                     {"mean_bot_f1", cand.mean_bot_f1}});
  }
  j["candidates"] = std::move(cands);
  return j;
}

// ---------------------------------------------------------------------------
// scores.jsonl
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const BotometerScore& s) {
  nlohmann::ordered_json j;
  j["user_id"] = s.user_id;
  j["score"] = s.score;
  j["retrieved_at"] = format_timestamp(s.retrieved_at);
  return j;
}

/// Reads {"user_id", "score", "retrieved_at"} lines; a later line for the
/// same user wins. A missing file yields an empty map.
inline std::unordered_map<std::string, BotometerScore> read_scores_file(const std::string& path,
                                                                        ScoreSource source,
                                                                        bool must_exist) {
  std::unordered_map<std::string, BotometerScore> out;
  std::ifstream in(path);
  if (!in) {
    if (must_exist) throw DataError("cannot open scores '" + path + "'");
    return out;
  }
  detail::for_each_jsonl(in, path, [&](const nlohmann::json& j) {
    BotometerScore s;
    s.user_id = detail::require_string(j, "user_id");
    const auto& v = detail::require(j, "score");
    if (!v.is_number()) throw DataError("field 'score' must be a number");
    s.score = v.get<double>();
    if (!(s.score >= 0.0 && s.score <= 1.0)) throw DataError("score outside [0, 1]");
    if (auto it = j.find("retrieved_at"); it != j.end() && it->is_string()) {
      s.retrieved_at = parse_timestamp(it->get<std::string>()).value_or(0);
    }
    s.source = source;
    out[s.user_id] = std::move(s);
  });
  return out;
}

inline std::unordered_map<std::string, BotometerScore> load_scores(const std::string& path) {
  return read_scores_file(path, ScoreSource::file, true);
}

// ---------------------------------------------------------------------------
// Provider client
// ---------------------------------------------------------------------------

struct ProviderConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080" or "https://host/api"
  std::string token;
  double timeout_seconds = 10.0;
  /// Retries after the first attempt.
  std::size_t max_retries = 3;
  std::int64_t backoff_base_ms = 200;
  std::string cache_path = "scores.jsonl";
  std::size_t concurrency = 4;

  void validate() const {
    if (endpoint.empty()) throw UsageError("provider endpoint is not set");
    if (!endpoint.starts_with("http://") && !endpoint.starts_with("https://")) {
      throw UsageError("provider endpoint must start with http:// or https://");
    }
    if (!(timeout_seconds > 0)) throw UsageError("provider timeout must be > 0");
    if (backoff_base_ms < 0) throw UsageError("provider backoff must be >= 0");
    if (concurrency < 1) throw UsageError("provider concurrency must be >= 1");
    if (cache_path.empty()) throw UsageError("provider cache path is not set");
  }

  /// Fills token from BOTSCREEN_API_TOKEN when unset.
  void token_from_environment() {
    if (!token.empty()) return;
    if (const char* env = std::getenv(kTokenEnvVar)) token = env;
  }
};

enum class FetchStatus { ok, cached, invalid_response, unavailable };

inline std::string_view to_string(FetchStatus s) {
  switch (s) {
    case FetchStatus::ok:
      return "ok";
    case FetchStatus::cached:
      return "cached";
    case FetchStatus::invalid_response:
      return "invalid-response";
    case FetchStatus::unavailable:
      return "unavailable";
  }
  return "unavailable";
}

struct FetchOutcome {
  std::string user_id;
  FetchStatus status = FetchStatus::unavailable;
  std::optional<BotometerScore> score;  // set for ok and cached
  std::string detail;
  std::size_t attempts = 0;
};

struct FetchReport {
  std::vector<FetchOutcome> outcomes;  // input order
  std::size_t requests = 0;
  std::size_t missing() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.score ? 0 : 1;
    return n;
  }
};

struct HttpReply {
  int status = 0;
  std::string body;
};

/// Performs one GET of a path (with query) against the endpoint; nullopt on
/// a transport failure. One instance per worker thread.
using HttpGet = std::function<std::optional<HttpReply>(const std::string&)>;
using HttpGetFactory = std::function<HttpGet(const ProviderConfig&)>;

namespace detail {

inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(c);
    } else {
      out.push_back('%');
      out.push_back(kHex[u >> 4]);
      out.push_back(kHex[u & 15]);
    }
  }
  return out;
}

/// Splits "scheme://host[:port][/base]" into ("scheme://host[:port]", "/base").
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  auto path_start = endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string base = endpoint.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {endpoint.substr(0, path_start), base};
}

inline HttpGet httplib_get(const ProviderConfig& config) {
  auto [origin, base] = split_endpoint(config.endpoint);
  auto client = std::make_shared<httplib::Client>(origin);
  auto secs = std::chrono::duration<double>(config.timeout_seconds);
  auto usec = std::chrono::duration_cast<std::chrono::microseconds>(secs);
  client->set_connection_timeout(usec);
  client->set_read_timeout(usec);
  httplib::Headers headers;
  if (!config.token.empty()) headers.emplace("Authorization", "Bearer " + config.token);
  return [client, headers](const std::string& path) -> std::optional<HttpReply> {
    auto res = client->Get(path, headers);
    if (!res) return std::nullopt;
    return HttpReply{res->status, res->body};
  };
}

/// Parses a 200 body; returns the score or an error message.
inline std::variant<double, std::string> parse_score_body(const std::string& body,
                                                          const std::string& user_id) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::string("response is not a JSON object");
  auto id = j.find("user_id");
  if (id == j.end() || !id->is_string() || id->get<std::string>() != user_id) {
    return std::string("response user_id does not match the request");
  }
  auto score = j.find("score");
  if (score == j.end() || !score->is_number()) return std::string("response lacks a numeric score");
  double v = score->get<double>();
  if (!(v >= 0.0 && v <= 1.0)) return "score " + score->dump() + " outside [0, 1]";
  return v;
}

}  // namespace detail

struct FetchOptions {
  HttpGetFactory transport = detail::httplib_get;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  std::function<Timestamp()> clock = now_utc;
};

/// Delay before retry number `retry` (0-based): base * 2^retry.
inline std::chrono::milliseconds backoff_delay(std::int64_t base_ms, std::size_t retry) {
  return std::chrono::milliseconds(base_ms << std::min<std::size_t>(retry, 20));
}

/// Cached ids are answered from the cache without any request. Misses are
/// fetched by up to `concurrency` workers; new scores are appended to the
/// cache in input order once all fetches finish.
inline FetchReport fetch_scores(const ProviderConfig& config, std::span<const std::string> user_ids,
                                const FetchOptions& options = {}) {
  config.validate();
  auto cache = read_scores_file(config.cache_path, ScoreSource::cache, false);
  FetchReport report;
  report.outcomes.resize(user_ids.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    auto& out = report.outcomes[i];
    out.user_id = user_ids[i];
    if (auto it = cache.find(user_ids[i]); it != cache.end()) {
      out.status = FetchStatus::cached;
      out.score = it->second;
      out.score->source = ScoreSource::cache;
    } else {
      misses.push_back(i);
    }
  }

  const std::string base = detail::split_endpoint(config.endpoint).second;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> requests{0};
  auto worker = [&] {
    HttpGet get = options.transport(config);
    for (std::size_t m = next++; m < misses.size(); m = next++) {
      auto& out = report.outcomes[misses[m]];
      std::string path = base + "/score?user_id=" + detail::percent_encode(out.user_id);
      for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) options.sleep(backoff_delay(config.backoff_base_ms, attempt - 1));
        ++requests;
        ++out.attempts;
        auto reply = get(path);
        if (!reply) {
          out.detail = "transport failure";
          continue;
        }
        if (reply->status != 200) {
          out.detail = "HTTP " + std::to_string(reply->status);
          continue;
        }
        auto parsed = detail::parse_score_body(reply->body, out.user_id);
        if (auto* err = std::get_if<std::string>(&parsed)) {
          out.status = FetchStatus::invalid_response;
          out.detail = *err;
        } else {
          out.status = FetchStatus::ok;
          out.detail.clear();
          out.score = BotometerScore{out.user_id, std::get<double>(parsed), options.clock(),
                                     ScoreSource::live};
        }
        break;
      }
    }
  };
  std::size_t workers = std::min(config.concurrency, misses.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  report.requests = requests;

  std::ofstream cache_out;
  for (std::size_t i : misses) {
    const auto& out = report.outcomes[i];
    if (out.status != FetchStatus::ok) continue;
    if (!cache_out.is_open()) {
      cache_out.open(config.cache_path, std::ios::app);
      if (!cache_out) throw DataError("cannot append to cache '" + config.cache_path + "'");
    }
    cache_out << to_json(*out.score).dump() << '\n';
  }
  return report;
}

}  // namespace botscreen
