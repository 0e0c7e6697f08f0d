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

// Bundled word lists: the given-name lexicon used by the user-name feature
// and the stopword list used by the topic tokenizer. The same lists ship as
// data/given_names.txt and data/stopwords.txt (one lowercase token per line).

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "botscreen/core.hpp"
#include "botscreen/text.hpp"

namespace botscreen {

using WordSet = std::unordered_set<std::string>;

/// One token per line; blank lines and lines starting with '#' are skipped.
/// Tokens are lowercased and trimmed.
inline WordSet parse_word_list(std::string_view contents) {
  WordSet words;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string line = text::normalize_whitespace(contents.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') words.insert(text::lowercase(line));
    pos = end + 1;
  }
  return words;
}

inline WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_word_list(buffer.str());
}

namespace detail {
// Defined in src/lexicon_data.cpp.
std::string_view given_names_text();
std::string_view stopwords_text();
}  // namespace detail

inline const WordSet& bundled_given_names() {
  static const WordSet names = parse_word_list(detail::given_names_text());
  return names;
}

inline const WordSet& bundled_stopwords() {
  static const WordSet words = parse_word_list(detail::stopwords_text());
  return words;
}

}  // namespace botscreen
