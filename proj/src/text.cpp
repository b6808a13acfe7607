// Copyright 2026 The slate-lens Authors
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

#include "slatelens/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "slatelens/error.hpp"

namespace slatelens {
namespace {

constexpr std::array<std::string_view, 30> kAbbreviations = {
    "e.g", "i.e", "cf", "vs", "al", "fig", "figs", "eq", "eqs", "sec", "tab", "no", "dr", "mr", "mrs",
    "ms", "prof", "approx", "resp", "ref", "refs", "viz", "ca", "incl", "w.r.t", "wrt", "appx", "thm",
    "lem", "def"};

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminal(char c) noexcept { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) noexcept { return c == ')' || c == ']' || c == '"' || c == '\''; }

// Word immediately before position `dot` (exclusive), lowercased, with
// leading opening punctuation removed.
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  std::string word;
  for (std::size_t i = begin; i < dot; ++i) {
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
  }
  const auto first = word.find_first_not_of("([\"'");
  return first == std::string::npos ? std::string{} : word.substr(first);
}

bool is_abbreviation(std::string_view word) noexcept {
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

void push_segment(std::vector<std::string>& out, std::string_view text, std::size_t begin,
                  std::size_t end) {
  const auto seg = trim(text.substr(begin, end - begin));
  if (!seg.empty()) out.emplace_back(seg);
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n' || c == '\r') {
      push_segment(out, text, start, i);
      start = ++i;
      continue;
    }
    if (!is_terminal(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_terminal(text[j])) ++j;
    while (j < text.size() && is_closer(text[j])) ++j;
    const bool at_break = j == text.size() || is_space(text[j]);
    const bool guarded = c == '.' && j == i + 1 && is_abbreviation(word_before(text, i));
    if (at_break && !guarded) {
      push_segment(out, text, start, j);
      start = j;
    }
    i = j;
  }
  push_segment(out, text, start, text.size());
  return out;
}

std::string merge_review_fields(std::string_view summary, std::string_view strengths,
                                std::string_view weaknesses, std::string_view comments) {
  std::string merged;
  for (const auto field : {summary, strengths, weaknesses, comments}) {
    const auto t = trim(field);
    if (t.empty()) continue;
    if (!merged.empty()) merged.push_back('\n');
    merged.append(t);
  }
  if (merged.empty()) throw DataError("empty review: all text fields are blank");
  return merged;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !is_space(sentence[j])) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(sentence[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(sentence[e - 1]))) --e;
    if (e > b) {
      std::string tok(sentence.substr(b, e - b));
      for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

}  // namespace slatelens
