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

// Shared fixtures for the unit and acceptance suites.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "botscreen/core.hpp"
#include "botscreen/topics.hpp"

namespace botscreen::testing {

struct PlantedCorpus {
  std::vector<TokenList> docs;
  std::vector<std::string> vocab_a, vocab_b;
  std::vector<int> source;  // 0 or 1 per document
};

/// Documents drawn wholly from one of two disjoint vocabularies.
inline PlantedCorpus planted_two_topics(std::size_t n_docs, std::size_t tokens_per_doc,
                                        std::size_t words_per_vocab, std::uint64_t seed) {
  PlantedCorpus c;
  for (std::size_t i = 0; i < words_per_vocab; ++i) {
    c.vocab_a.push_back("alpha" + std::to_string(i));
    c.vocab_b.push_back("omega" + std::to_string(i));
  }
  Rng rng(seed);
  for (std::size_t d = 0; d < n_docs; ++d) {
    int s = int(d % 2);
    const auto& vocab = s == 0 ? c.vocab_a : c.vocab_b;
    TokenList doc;
    for (std::size_t t = 0; t < tokens_per_doc; ++t) doc.push_back(vocab[rng.below(vocab.size())]);
    c.docs.push_back(std::move(doc));
    c.source.push_back(s);
  }
  return c;
}

/// Mass of each topic's word distribution on a word list.
inline double topic_mass(const TopicModel& m, std::size_t k, const std::vector<std::string>& words) {
  double mass = 0;
  for (const auto& w : words) {
    if (auto id = m.word_id(w)) mass += m.word_prob(k, *id);
  }
  return mass;
}

/// Best one-to-one matching of the two planted vocabularies to two topics;
/// returns the smaller of the two matched masses and the topic matched to A.
inline std::pair<double, std::size_t> planted_purity(const TopicModel& m, const PlantedCorpus& c) {
  double best = -1;
  std::size_t best_a = 0;
  for (std::size_t ka = 0; ka < m.topics; ++ka) {
    for (std::size_t kb = 0; kb < m.topics; ++kb) {
      if (ka == kb) continue;
      double worst = std::min(topic_mass(m, ka, c.vocab_a), topic_mass(m, kb, c.vocab_b));
      if (worst > best) {
        best = worst;
        best_a = ka;
      }
    }
  }
  return {best, best_a};
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("botscreen-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace botscreen::testing
