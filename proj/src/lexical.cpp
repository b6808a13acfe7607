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

#include "slatelens/lexical.hpp"

#include <algorithm>

#include "slatelens/error.hpp"
#include "slatelens/text.hpp"

namespace slatelens {
namespace {

std::size_t intersection_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

// |(a ∪ b) ∩ s| without materializing the union.
std::size_t covered_size(const std::vector<std::string>& a, const std::vector<std::string>& b,
                         const std::vector<std::string>& s) {
  std::size_t n = 0;
  for (const auto& g : s) {
    if (std::binary_search(a.begin(), a.end(), g) || std::binary_search(b.begin(), b.end(), g)) ++n;
  }
  return n;
}

}  // namespace

bool NgramSet::empty() const noexcept {
  return std::all_of(by_order.begin(), by_order.end(), [](const auto& v) { return v.empty(); });
}

NgramSet extract_ngrams(const std::vector<std::string>& sentences, std::size_t n_max) {
  NgramSet out;
  n_max = std::min(n_max, kMaxNgram);
  for (const auto& sentence : sentences) {
    const auto tokens = tokenize(sentence);
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t k = 1; k < n; ++k) {
          gram.push_back(' ');
          gram += tokens[i + k];
        }
        out.by_order[n - 1].push_back(std::move(gram));
      }
    }
  }
  for (auto& v : out.by_order) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

double lexical_coverage(const NgramSet& review1, const NgramSet& review2, const NgramSet& abstract) {
  double total = 0.0;
  for (std::size_t n = 1; n <= kMaxNgram; ++n) {
    const auto& s = abstract.order(n);
    if (s.empty()) continue;
    total += static_cast<double>(covered_size(review1.order(n), review2.order(n), s)) /
             static_cast<double>(s.size());
  }
  return total;
}

double lexical_coverage(const std::vector<std::string>& review1, const std::vector<std::string>& review2,
                        const std::vector<std::string>& abstract) {
  const auto a = extract_ngrams(abstract);
  if (a.order(1).empty()) throw DataError("lexical coverage: empty abstract");
  return lexical_coverage(extract_ngrams(review1), extract_ngrams(review2), a);
}

double lexical_redundancy(const NgramSet& review1, const NgramSet& review2) {
  std::size_t total = 0;
  for (std::size_t n = 1; n <= kMaxNgram; ++n) total += intersection_size(review1.order(n), review2.order(n));
  return static_cast<double>(total);
}

double lexical_redundancy(const std::vector<std::string>& review1, const std::vector<std::string>& review2) {
  return lexical_redundancy(extract_ngrams(review1), extract_ngrams(review2));
}

}  // namespace slatelens
