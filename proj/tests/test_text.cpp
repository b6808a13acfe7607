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

#include <doctest.h>

#include <string>
#include <vector>

#include "slatelens/error.hpp"
#include "slatelens/rng.hpp"
#include "slatelens/text.hpp"

using namespace slatelens;
using Sentences = std::vector<std::string>;

namespace {

std::string squeeze(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\n' && c != '\t') out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("split: terminated sentences") {
  CHECK(split_sentences("A. B.") == Sentences{"A.", "B."});
  CHECK(split_sentences("Is it? Yes! Good.") == Sentences{"Is it?", "Yes!", "Good."});
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   \n\t ").empty());
}

TEST_CASE("split: rule table") {
  struct Row {
    const char* text;
    Sentences want;
  };
  const Row rows[] = {
      {"e.g. the method", {"e.g. the method"}},
      {"We use i.e. a bound. Then stop.", {"We use i.e. a bound.", "Then stop."}},
      {"See Fig. 3 for details.", {"See Fig. 3 for details."}},
      {"Smith et al. show this. Fine.", {"Smith et al. show this.", "Fine."}},
      {"Accuracy is 3.5 points higher.", {"Accuracy is 3.5 points higher."}},
      {"He said \"stop.\" Then left.", {"He said \"stop.\"", "Then left."}},
      {"(See above.) Next one.", {"(See above.)", "Next one."}},
      {"Wait... really?! Yes.", {"Wait...", "really?!", "Yes."}},
      {"line one\nline two", {"line one", "line two"}},
      {"no terminal", {"no terminal"}},
      {"Compare vs. baseline.", {"Compare vs. baseline."}},
      {"A.B. test", {"A.B.", "test"}},
  };
  for (const auto& row : rows) {
    CAPTURE(row.text);
    CHECK(split_sentences(row.text) == row.want);
  }
}

TEST_CASE("split: segments reconstruct the input modulo whitespace") {
  Rng rng(17);
  const char* pieces[] = {"word", " ", ".", "?", "!", "e.g.", "\n", "3.14", "\"", ")", "Fig.", "  "};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto n = 1 + rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) text += pieces[rng.below(std::size(pieces))];
    const auto parts = split_sentences(text);
    std::string joined;
    for (const auto& p : parts) {
      CHECK_FALSE(p.empty());
      joined += p;
    }
    CHECK(squeeze(joined) == squeeze(text));
    CHECK(split_sentences(text) == parts);
  }
}

TEST_CASE("merge review fields") {
  CHECK(merge_review_fields("s", "a", "b", "c") == "s\na\nb\nc");
  CHECK(merge_review_fields("s", "", "", "") == "s");
  CHECK(merge_review_fields("", "  ", "w", "") == "w");
  CHECK(merge_review_fields("  s  ", "a", "", "c ") == "s\na\nc");
  CHECK_THROWS_AS(merge_review_fields("", "", "", ""), DataError);
  CHECK_THROWS_AS(merge_review_fields(" ", "\n", "\t", ""), DataError);
}

TEST_CASE("tokenize: lowercase, strip edge punctuation, keep numerals") {
  CHECK(tokenize("A b.") == Sentences{"a", "b"});
  CHECK(tokenize("  (Hello), WORLD!! ") == Sentences{"hello", "world"});
  CHECK(tokenize("state-of-the-art 3.5% x") == Sentences{"state-of-the-art", "3.5", "x"});
  CHECK(tokenize("... -- !!").empty());
  CHECK(tokenize("").empty());
}
