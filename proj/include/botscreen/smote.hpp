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

/// @file smote.hpp
/// Synthetic minority oversampling: new minority rows are drawn on the
/// segment between a minority row and one of its k nearest minority
/// neighbours (exact Euclidean search).

#include <ostream>
#include <vector>

#include "botscreen/core.hpp"
#include "json.hpp"

namespace botscreen {

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  /// Minority/majority ratio to reach; 1.0 means parity.
  double target_ratio = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (k_neighbors < 1) throw UsageError("SMOTE k_neighbors must be >= 1");
    if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
      throw UsageError("SMOTE target_ratio must lie in (0, 1]");
    }
  }
};

/// Provenance of one synthetic row: parent_a + u * (parent_b - parent_a).
/// Parents are row indices into the input matrix.
struct SyntheticOrigin {
  std::size_t parent_a = 0;
  std::size_t parent_b = 0;
  double u = 0.0;
};

struct SmoteResult {
  Matrix x;                        // input rows followed by synthetic rows
  std::vector<Label> y;
  std::vector<SyntheticOrigin> origins;  // one per appended row
};

/// a + u * (b - a), component-wise.
inline std::vector<double> interpolate(std::span<const double> a, std::span<const double> b,
                                       double u) {
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + u * (b[j] - a[j]);
  return out;
}

/// Number of synthetic minority rows needed to reach the target ratio.
inline std::size_t smote_deficit(std::size_t minority, std::size_t majority,
                                 double target_ratio) {
  // The epsilon keeps products such as 0.1 * 90 from rounding up past 9.
  auto wanted = std::size_t(std::ceil(target_ratio * double(majority) - 1e-9));
  return wanted > minority ? wanted - minority : 0;
}

/// Neighbour lists (k nearest other minority rows, nearest first, ties by
/// row index) for each minority row.
inline std::vector<std::vector<std::size_t>> minority_neighbors(
    const Matrix& x, std::span<const std::size_t> minority, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(minority.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < minority.size(); ++a) {
    dist.clear();
    auto ra = x.row(minority[a]);
    for (std::size_t b = 0; b < minority.size(); ++b) {
      if (a == b) continue;
      auto rb = x.row(minority[b]);
      double d = 0;
      for (std::size_t j = 0; j < ra.size(); ++j) d += (ra[j] - rb[j]) * (ra[j] - rb[j]);
      dist.emplace_back(d, minority[b]);
    }
    std::partial_sort(dist.begin(), dist.begin() + std::ptrdiff_t(k), dist.end());
    for (std::size_t i = 0; i < k; ++i) out[a].push_back(dist[i].second);
  }
  return out;
}

/// Appends synthetic rows of the minority class until
/// minority >= ceil(target_ratio * majority). Input rows are returned
/// unchanged and in order. Draw i uses its own random substream of the seed.
inline SmoteResult smote_rebalance(const Matrix& x, std::span<const Label> y,
                                   const SmoteConfig& config) {
  config.validate();
  if (y.size() != x.rows()) throw DataError("SMOTE: label count does not match rows");
  std::vector<std::size_t> bots, non_bots;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!is_binary(y[i])) throw DataError("SMOTE: rows must be labeled bot or non-bot");
    for (double v : x.row(i)) {
      if (is_missing(v)) throw DataError("SMOTE: input contains missing values; impute first");
    }
    (y[i] == Label::bot ? bots : non_bots).push_back(i);
  }
  bool bot_minority = bots.size() <= non_bots.size();
  const auto& minority = bot_minority ? bots : non_bots;
  const auto& majority = bot_minority ? non_bots : bots;
  Label minority_label = bot_minority ? Label::bot : Label::non_bot;

  SmoteResult result{x, std::vector<Label>(y.begin(), y.end()), {}};
  std::size_t needed = smote_deficit(minority.size(), majority.size(), config.target_ratio);
  if (needed == 0) return result;
  if (minority.size() <= config.k_neighbors) {
    throw DataError("SMOTE: minority class has " + std::to_string(minority.size()) +
                    " rows, need more than k_neighbors=" + std::to_string(config.k_neighbors) +
                    "; lower k_neighbors");
  }
  auto neighbors = minority_neighbors(x, minority, config.k_neighbors);
  result.origins.reserve(needed);
  for (std::size_t i = 0; i < needed; ++i) {
    Rng rng(substream_seed(config.seed, i));
    std::size_t a = rng.below(minority.size());
    std::size_t b = neighbors[a][rng.below(config.k_neighbors)];
    double u = rng.uniform();
    result.x.append_row(interpolate(x.row(minority[a]), x.row(b), u));
    result.y.push_back(minority_label);
    result.origins.push_back({minority[a], b, u});
  }
  return result;
}

/// smote_audit.jsonl: {"parent_a", "parent_b", "u"} per synthetic row.
inline void write_smote_audit(std::ostream& out, std::span<const SyntheticOrigin> origins) {
  for (const auto& o : origins) {
    nlohmann::ordered_json j;
    j["parent_a"] = o.parent_a;
    j["parent_b"] = o.parent_b;
    j["u"] = o.u;
    out << j.dump() << '\n';
  }
}

}  // namespace botscreen
