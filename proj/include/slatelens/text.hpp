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

#include <string>
#include <string_view>
#include <vector>

namespace slatelens {

/// Rule-based sentence segmentation. A sentence ends at '.', '!' or '?'
/// (plus any trailing closing quotes/brackets) followed by whitespace or end
/// of input, unless the word before a '.' is a known abbreviation. Line breaks
/// always end a sentence. Segments are trimmed; empty segments are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Joins the four review fields in the order summary, strengths, weaknesses,
/// comments with a single '\n'. Blank fields are skipped. Throws DataError if
/// every field is blank.
std::string merge_review_fields(std::string_view summary, std::string_view strengths,
                                std::string_view weaknesses, std::string_view comments);

/// Lowercases, splits on whitespace and strips leading/trailing ASCII
/// punctuation from each token. Tokens that become empty are dropped.
std::vector<std::string> tokenize(std::string_view sentence);

std::string_view trim(std::string_view s) noexcept;

}  // namespace slatelens
