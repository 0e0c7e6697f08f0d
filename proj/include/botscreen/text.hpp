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

// Byte-level text helpers shared by the feature extractors and the topic
// tokenizer. Bytes >= 0x80 are treated as word characters so UTF-8 sequences
// are never split.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace botscreen::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }
inline bool is_word(char c) {
  return is_ascii_alpha(c) || is_digit(c) || is_high(c);
}

inline char to_lower(char c) { return is_upper(c) ? char(c - 'A' + 'a') : c; }

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower(c);
  return out;
}

/// Trim and collapse internal whitespace runs to a single space. Case is
/// preserved.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

/// Whitespace-delimited tokens.
inline std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

/// Half-open byte span [first, second).
using Span = std::pair<std::size_t, std::size_t>;

/// URL occurrences: a case-insensitive "http://" or "https://" followed by at
/// least one non-whitespace byte. The span runs to the next whitespace.
inline std::vector<Span> find_urls(std::string_view s) {
  std::vector<Span> spans;
  auto match_at = [&](std::size_t pos) -> std::size_t {
    static constexpr std::string_view kHttp = "http";
    if (pos + 4 > s.size()) return 0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (to_lower(s[pos + k]) != kHttp[k]) return 0;
    }
    std::size_t p = pos + 4;
    if (p < s.size() && to_lower(s[p]) == 's') ++p;
    if (s.substr(p, 3) != "://") return 0;
    p += 3;
    if (p >= s.size() || is_space(s[p])) return 0;
    while (p < s.size() && !is_space(s[p])) ++p;
    return p;
  };
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::size_t end = match_at(i); end != 0) {
      spans.emplace_back(i, end);
      i = end;
    } else {
      ++i;
    }
  }
  return spans;
}

inline bool contains_url(std::string_view s) { return !find_urls(s).empty(); }

/// Maximal runs of word characters.
inline std::vector<std::string_view> split_alnum(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_word(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && is_word(s[i])) ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

/// Splits an alphanumeric run at case and digit boundaries:
/// "JohnB" -> {"John", "B"}, "XMLParser" -> {"XML", "Parser"},
/// "deals900" -> {"deals", "900"}.
inline std::vector<std::string_view> split_camel(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    char prev = s[i - 1], cur = s[i];
    bool boundary = (is_lower(prev) && is_upper(cur)) ||
                    (is_digit(prev) != is_digit(cur) &&
                     (is_ascii_alpha(prev) || is_ascii_alpha(cur))) ||
                    (is_upper(prev) && is_upper(cur) && i + 1 < s.size() &&
                     is_lower(s[i + 1]));
    if (boundary) {
      parts.push_back(s.substr(start, i - start));
      start = i;
    }
  }
  if (start < s.size()) parts.push_back(s.substr(start));
  return parts;
}

}  // namespace botscreen::text
