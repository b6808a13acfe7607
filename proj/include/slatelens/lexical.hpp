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

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace slatelens {

inline constexpr std::size_t kMaxNgram = 3;

/// Unique n-grams per order n = 1..3, each stored as its tokens joined by a
/// single space and kept sorted for linear-time intersection.
struct NgramSet {
  std::array<std::vector<std::string>, kMaxNgram> by_order;

  const std::vector<std::string>& order(std::size_t n) const { return by_order.at(n - 1); }
  bool empty() const noexcept;
};

/// N-grams are formed within each sentence only.
NgramSet extract_ngrams(const std::vector<std::string>& sentences, std::size_t n_max = kMaxNgram);

/// Sum over n of |(R1 ∪ R2) ∩ A| / |A| for the abstract n-gram set A, with
/// empty orders of A contributing 0. Range [0, 3].
double lexical_coverage(const NgramSet& review1, const NgramSet& review2, const NgramSet& abstract);

/// Convenience overload on raw sentences; throws DataError on an empty abstract.
double lexical_coverage(const std::vector<std::string>& review1, const std::vector<std::string>& review2,
                        const std::vector<std::string>& abstract);

/// Sum over n of |R1 ∩ R2|.
double lexical_redundancy(const NgramSet& review1, const NgramSet& review2);
double lexical_redundancy(const std::vector<std::string>& review1, const std::vector<std::string>& review2);

}  // namespace slatelens
