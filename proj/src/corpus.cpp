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

#include "slatelens/corpus.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slatelens/error.hpp"
#include "slatelens/text.hpp"

namespace slatelens {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<std::pair<const char*, const char*>>& default_country_regions() {
  static const std::vector<std::pair<const char*, const char*>> table = {
      {"United States", "North America"},
      {"USA", "North America"},
      {"Canada", "North America"},
      {"Mexico", "Latin America"},
      {"Brazil", "Latin America"},
      {"Argentina", "Latin America"},
      {"Chile", "Latin America"},
      {"Colombia", "Latin America"},
      {"Peru", "Latin America"},
      {"Uruguay", "Latin America"},
      {"Venezuela", "Latin America"},
      {"Cuba", "Latin America"},
      {"Ecuador", "Latin America"},
      {"United Kingdom", "Western Europe"},
      {"UK", "Western Europe"},
      {"Ireland", "Western Europe"},
      {"France", "Western Europe"},
      {"Germany", "Western Europe"},
      {"Netherlands", "Western Europe"},
      {"Belgium", "Western Europe"},
      {"Luxembourg", "Western Europe"},
      {"Switzerland", "Western Europe"},
      {"Austria", "Western Europe"},
      {"Sweden", "Northern Europe"},
      {"Norway", "Northern Europe"},
      {"Denmark", "Northern Europe"},
      {"Finland", "Northern Europe"},
      {"Iceland", "Northern Europe"},
      {"Estonia", "Northern Europe"},
      {"Latvia", "Northern Europe"},
      {"Lithuania", "Northern Europe"},
      {"Italy", "Southern Europe"},
      {"Spain", "Southern Europe"},
      {"Portugal", "Southern Europe"},
      {"Greece", "Southern Europe"},
      {"Malta", "Southern Europe"},
      {"Cyprus", "Southern Europe"},
      {"Slovenia", "Southern Europe"},
      {"Croatia", "Southern Europe"},
      {"Poland", "Eastern Europe"},
      {"Czech Republic", "Eastern Europe"},
      {"Czechia", "Eastern Europe"},
      {"Slovakia", "Eastern Europe"},
      {"Hungary", "Eastern Europe"},
      {"Romania", "Eastern Europe"},
      {"Bulgaria", "Eastern Europe"},
      {"Ukraine", "Eastern Europe"},
      {"Russia", "Eastern Europe"},
      {"Belarus", "Eastern Europe"},
      {"Serbia", "Eastern Europe"},
      {"Israel", "Middle East & North Africa"},
      {"Turkey", "Middle East & North Africa"},
      {"Iran", "Middle East & North Africa"},
      {"Saudi Arabia", "Middle East & North Africa"},
      {"United Arab Emirates", "Middle East & North Africa"},
      {"Qatar", "Middle East & North Africa"},
      {"Egypt", "Middle East & North Africa"},
      {"Morocco", "Middle East & North Africa"},
      {"Tunisia", "Middle East & North Africa"},
      {"Jordan", "Middle East & North Africa"},
      {"Lebanon", "Middle East & North Africa"},
      {"Algeria", "Middle East & North Africa"},
      {"South Africa", "Sub-Saharan Africa"},
      {"Nigeria", "Sub-Saharan Africa"},
      {"Kenya", "Sub-Saharan Africa"},
      {"Ghana", "Sub-Saharan Africa"},
      {"Ethiopia", "Sub-Saharan Africa"},
      {"Rwanda", "Sub-Saharan Africa"},
      {"Uganda", "Sub-Saharan Africa"},
      {"Senegal", "Sub-Saharan Africa"},
      {"Tanzania", "Sub-Saharan Africa"},
      {"India", "South Asia"},
      {"Pakistan", "South Asia"},
      {"Bangladesh", "South Asia"},
      {"Sri Lanka", "South Asia"},
      {"Nepal", "South Asia"},
      {"China", "East Asia"},
      {"Japan", "East Asia"},
      {"South Korea", "East Asia"},
      {"Korea", "East Asia"},
      {"Taiwan", "East Asia"},
      {"Hong Kong", "East Asia"},
      {"Mongolia", "East Asia"},
      {"Singapore", "Southeast Asia"},
      {"Vietnam", "Southeast Asia"},
      {"Thailand", "Southeast Asia"},
      {"Malaysia", "Southeast Asia"},
      {"Indonesia", "Southeast Asia"},
      {"Philippines", "Southeast Asia"},
      {"Australia", "Oceania"},
      {"New Zealand", "Oceania"},
  };
  return table;
}

RegionMap make_region_map(const std::vector<std::pair<std::string, std::string>>& entries) {
  RegionMap map;
  std::set<std::string> names;
  for (const auto& [country, region] : entries) {
    map.country_to_region[lower(country)] = region;
    names.insert(region);
  }
  if (names.size() > kRegionCount) {
    throw ConfigError("region map defines " + std::to_string(names.size()) + " regions; at most " +
                      std::to_string(kRegionCount) + " are supported");
  }
  map.regions.assign(names.begin(), names.end());
  return map;
}

[[noreturn]] void fail_at(const fs::path& file, std::size_t line, const std::string& what) {
  throw DataError(file.string() + ":" + std::to_string(line) + ": " + what);
}

// Field accessors that report schema violations with file and line.
class RecordReader {
 public:
  RecordReader(const json& obj, const fs::path& file, std::size_t line)
      : obj_(obj), file_(file), line_(line) {}

  std::string str(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end()) fail_at(file_, line_, std::string("missing field '") + key + "'");
    if (!it->is_string()) fail_at(file_, line_, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  }

  std::optional<std::string> opt_str(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail_at(file_, line_, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  }

  std::optional<int> opt_int(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) {
      fail_at(file_, line_, std::string("field '") + key + "' must be an integer");
    }
    return it->get<int>();
  }

  std::optional<double> opt_num(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) fail_at(file_, line_, std::string("field '") + key + "' must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) fail_at(file_, line_, std::string("field '") + key + "' must be finite");
    return v;
  }

  std::vector<std::string> str_list(const char* key) const {
    auto v = opt_str_list(key);
    if (!v) fail_at(file_, line_, std::string("missing field '") + key + "'");
    return *std::move(v);
  }

  std::optional<std::vector<std::string>> opt_str_list(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (!it->is_array()) fail_at(file_, line_, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : *it) {
      if (!e.is_string()) {
        fail_at(file_, line_, std::string("field '") + key + "' must contain only strings");
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { fail_at(file_, line_, what); }

 private:
  const json& obj_;
  const fs::path& file_;
  std::size_t line_;
};

template <typename F>
void for_each_record(const fs::path& file, F&& fn) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(file, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail_at(file, lineno, "record must be a JSON object");
    fn(RecordReader(obj, file, lineno));
  }
}

std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xf]);
  }
  return out;
}

void write_jsonl_line(std::ofstream& out, const json& j) { out << j.dump() << '\n'; }

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out.push_back('\n');
    out += l;
  }
  return out;
}

}  // namespace

std::optional<int> RegionMap::region_of(std::string_view country) const {
  const auto it = country_to_region.find(lower(trim(country)));
  if (it == country_to_region.end()) return std::nullopt;
  const auto pos = std::find(regions.begin(), regions.end(), it->second);
  return static_cast<int>(pos - regions.begin());
}

RegionMap RegionMap::defaults() {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [c, r] : default_country_regions()) entries.emplace_back(c, r);
  return make_region_map(entries);
}

RegionMap RegionMap::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open region map " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": region map must be an object");
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [country, region] : j.items()) {
    if (!region.is_string()) throw ConfigError(path.string() + ": region of '" + country + "' must be a string");
    entries.emplace_back(country, region.get<std::string>());
  }
  return make_region_map(entries);
}

CorpusPaths CorpusPaths::in_directory(const fs::path& dir) {
  CorpusPaths p{dir / "submissions.jsonl", dir / "reviews.jsonl", dir / "reviewers.jsonl",
                dir / "assignments.jsonl", std::nullopt};
  if (fs::exists(dir / "regions.json")) p.regions = dir / "regions.json";
  return p;
}

std::optional<std::size_t> ReviewCorpus::find_submission(std::string_view id) const {
  const auto it = submission_index_.find(std::string(id));
  if (it == submission_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ReviewCorpus::find_reviewer(std::string_view id) const {
  const auto it = reviewer_index_.find(std::string(id));
  if (it == reviewer_index_.end()) return std::nullopt;
  return it->second;
}

const ReviewDoc* ReviewCorpus::review_for(std::size_t submission, std::size_t reviewer) const {
  const auto it = review_index_.find({submission, reviewer});
  return it == review_index_.end() ? nullptr : &reviews[it->second];
}

std::optional<double> ReviewCorpus::expertise(std::size_t submission, std::size_t reviewer) const {
  const auto it = assignment_index_.find({submission, reviewer});
  if (it == assignment_index_.end()) return std::nullopt;
  return assignments[it->second].value;
}

void ReviewCorpus::reindex() {
  submission_index_.clear();
  reviewer_index_.clear();
  review_index_.clear();
  assignment_index_.clear();
  for (std::size_t i = 0; i < submissions.size(); ++i) submission_index_.emplace(submissions[i].id, i);
  for (std::size_t i = 0; i < reviewers.size(); ++i) reviewer_index_.emplace(reviewers[i].id, i);
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    review_index_.emplace(std::make_pair(reviews[i].submission, reviews[i].reviewer), i);
  }
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    assignment_index_.emplace(std::make_pair(assignments[i].submission, assignments[i].reviewer), i);
  }
}

bool ReviewCorpus::operator==(const ReviewCorpus& o) const {
  return submissions == o.submissions && reviews == o.reviews && reviewers == o.reviewers &&
         assignments == o.assignments && organizations == o.organizations && people == o.people &&
         region_map == o.region_map;
}

RawCorpus parse_corpus(const CorpusPaths& paths) {
  RawCorpus raw;
  if (paths.regions) raw.region_map = RegionMap::load(*paths.regions);

  for_each_record(paths.submissions, [&](const RecordReader& r) {
    raw.submissions.push_back({r.str("id"), r.str("abstract")});
  });

  for_each_record(paths.reviews, [&](const RecordReader& r) {
    RawReview rv{r.str("id"),        r.str("submission_id"), r.str("reviewer_id"),
                 r.str("summary"),   r.str("strengths"),     r.str("weaknesses"),
                 r.str("comments"),  r.opt_int("score"),     r.opt_int("meta_rating")};
    if (rv.score && (*rv.score < 1 || *rv.score > 10)) r.fail("score must be in [1,10]");
    if (rv.meta_rating && (*rv.meta_rating < 1 || *rv.meta_rating > 5)) {
      r.fail("meta_rating must be in [1,5]");
    }
    if (trim(rv.summary).empty() && trim(rv.strengths).empty() && trim(rv.weaknesses).empty() &&
        trim(rv.comments).empty()) {
      r.fail("empty review: all text fields are blank");
    }
    raw.reviews.push_back(std::move(rv));
  });

  for_each_record(paths.reviewers, [&](const RecordReader& r) {
    RawReviewer rv{r.str("id"), r.str_list("organizations"), r.opt_str("country"),
                   r.opt_int("h_index"), r.opt_str_list("coauthors"), r.opt_str_list("abstracts")};
    if (rv.h_index && *rv.h_index < 0) r.fail("h_index must be non-negative");
    raw.reviewers.push_back(std::move(rv));
  });

  for_each_record(paths.assignments, [&](const RecordReader& r) {
    RawAssignment a{r.str("submission_id"), r.str("reviewer_id"), r.opt_num("expertise")};
    if (a.expertise && *a.expertise < 0.0) r.fail("expertise must be non-negative");
    raw.assignments.push_back(std::move(a));
  });
  return raw;
}

ReviewCorpus build_corpus(const RawCorpus& raw) {
  ReviewCorpus c;
  c.region_map = raw.region_map;

  for (const auto& s : raw.submissions) {
    Submission sub{s.id, split_sentences(s.abstract), {}};
    if (sub.abstract_sentences.empty()) throw DataError("submission " + s.id + ": empty abstract");
    c.submissions.push_back(std::move(sub));
  }
  std::unordered_map<std::string, std::size_t> sub_idx;
  for (std::size_t i = 0; i < c.submissions.size(); ++i) {
    if (!sub_idx.emplace(c.submissions[i].id, i).second) {
      throw DataError("duplicate submission id " + c.submissions[i].id);
    }
  }

  std::unordered_map<std::string, std::size_t> rev_idx;
  for (std::size_t i = 0; i < raw.reviewers.size(); ++i) {
    if (!rev_idx.emplace(raw.reviewers[i].id, i).second) {
      throw DataError("duplicate reviewer id " + raw.reviewers[i].id);
    }
    c.people.push_back(raw.reviewers[i].id);
  }

  std::unordered_map<std::string, int> org_idx;
  std::unordered_map<std::string, int> person_idx;
  for (std::size_t i = 0; i < c.people.size(); ++i) person_idx.emplace(c.people[i], static_cast<int>(i));

  for (const auto& r : raw.reviewers) {
    ReviewerRecord rec;
    rec.id = r.id;
    for (const auto& org : r.organizations) {
      auto [it, inserted] = org_idx.emplace(org, static_cast<int>(c.organizations.size()));
      if (inserted) c.organizations.push_back(org);
      rec.organization_ids.push_back(it->second);
    }
    std::sort(rec.organization_ids.begin(), rec.organization_ids.end());
    rec.organization_ids.erase(std::unique(rec.organization_ids.begin(), rec.organization_ids.end()),
                               rec.organization_ids.end());
    rec.country = r.country;
    if (r.country) rec.region_id = c.region_map.region_of(*r.country);
    rec.h_index = r.h_index;
    if (r.coauthors) {
      std::vector<int> ids;
      for (const auto& name : *r.coauthors) {
        auto [it, inserted] = person_idx.emplace(name, static_cast<int>(c.people.size()));
        if (inserted) c.people.push_back(name);
        ids.push_back(it->second);
      }
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      rec.coauthor_ids = std::move(ids);
    }
    if (r.abstracts) rec.publication_abstracts = r.abstracts;
    c.reviewers.push_back(std::move(rec));
  }

  std::set<std::pair<std::size_t, std::size_t>> assigned;
  for (const auto& a : raw.assignments) {
    const auto s = sub_idx.find(a.submission_id);
    if (s == sub_idx.end()) throw DataError("assignment references unknown submission " + a.submission_id);
    const auto r = rev_idx.find(a.reviewer_id);
    if (r == rev_idx.end()) throw DataError("assignment references unknown reviewer " + a.reviewer_id);
    if (!assigned.emplace(s->second, r->second).second) {
      throw DataError("reviewer " + a.reviewer_id + " assigned twice to submission " + a.submission_id);
    }
    c.submissions[s->second].reviewers.push_back(r->second);
    c.assignments.push_back({s->second, r->second, a.expertise});
  }
  for (const auto& sub : c.submissions) {
    if (!sub.reviewers.empty() && (sub.reviewers.size() < 2 || sub.reviewers.size() > 4)) {
      throw DataError("submission " + sub.id + " has " + std::to_string(sub.reviewers.size()) +
                      " assigned reviewers; expected 2 to 4");
    }
  }

  std::set<std::string> review_ids;
  std::set<std::pair<std::size_t, std::size_t>> reviewed;
  for (const auto& rv : raw.reviews) {
    const auto s = sub_idx.find(rv.submission_id);
    if (s == sub_idx.end()) {
      throw DataError("review " + rv.id + " references unknown submission " + rv.submission_id);
    }
    const auto r = rev_idx.find(rv.reviewer_id);
    if (r == rev_idx.end()) {
      throw DataError("review " + rv.id + " references unknown reviewer " + rv.reviewer_id);
    }
    if (!assigned.count({s->second, r->second})) {
      throw DataError("review " + rv.id + ": reviewer " + rv.reviewer_id + " is not assigned to submission " +
                      rv.submission_id);
    }
    if (!review_ids.insert(rv.id).second) throw DataError("duplicate review id " + rv.id);
    if (!reviewed.emplace(s->second, r->second).second) {
      throw DataError("duplicate review by " + rv.reviewer_id + " for submission " + rv.submission_id);
    }
    ReviewDoc doc{rv.id, s->second, r->second,
                  split_sentences(merge_review_fields(rv.summary, rv.strengths, rv.weaknesses, rv.comments)),
                  rv.score, rv.meta_rating};
    c.reviews.push_back(std::move(doc));
  }

  c.reindex();
  return c;
}

ReviewCorpus load_corpus(const CorpusPaths& paths) { return build_corpus(parse_corpus(paths)); }

std::string pseudonym(std::string_view domain, std::string_view identifier, std::string_view salt) {
  std::string msg;
  msg.reserve(domain.size() + 1 + identifier.size());
  msg.append(domain).push_back(':');
  msg.append(identifier);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const auto* key = reinterpret_cast<const unsigned char*>(salt.data());
  if (HMAC(EVP_sha256(), key, static_cast<int>(salt.size()),
           reinterpret_cast<const unsigned char*>(msg.data()), msg.size(), digest, &len) == nullptr) {
    throw DataError("HMAC computation failed");
  }
  const char prefix = domain == "org" ? 'o' : 'p';
  return std::string(1, prefix) + to_hex(digest, 10);
}

ReviewCorpus anonymize(const RawCorpus& raw, std::string_view salt) {
  std::map<std::string, std::string> used;  // pseudonym -> original, per domain
  auto hash = [&](std::string_view domain, const std::string& id) {
    auto p = pseudonym(domain, id, salt);
    const auto [it, inserted] = used.emplace(p, std::string(domain) + ":" + id);
    if (!inserted && it->second != std::string(domain) + ":" + id) {
      throw DataError("pseudonym collision between two identifiers; choose a different salt");
    }
    return p;
  };

  RawCorpus out = raw;
  for (auto& r : out.reviewers) {
    r.id = hash("person", r.id);
    for (auto& org : r.organizations) org = hash("org", org);
    if (r.coauthors) {
      for (auto& name : *r.coauthors) name = hash("person", name);
    }
  }
  for (auto& rv : out.reviews) rv.reviewer_id = hash("person", rv.reviewer_id);
  for (auto& a : out.assignments) a.reviewer_id = hash("person", a.reviewer_id);
  return build_corpus(out);
}

void write_corpus(const ReviewCorpus& c, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "submissions.jsonl");
    for (const auto& s : c.submissions) {
      write_jsonl_line(out, {{"id", s.id}, {"abstract", join_lines(s.abstract_sentences)}});
    }
  }
  {
    std::ofstream out(dir / "reviews.jsonl");
    for (const auto& r : c.reviews) {
      json j = {{"id", r.id},
                {"submission_id", c.submissions[r.submission].id},
                {"reviewer_id", c.reviewers[r.reviewer].id},
                {"summary", join_lines(r.sentences)},
                {"strengths", ""},
                {"weaknesses", ""},
                {"comments", ""}};
      if (r.score) j["score"] = *r.score;
      if (r.meta_rating) j["meta_rating"] = *r.meta_rating;
      write_jsonl_line(out, j);
    }
  }
  {
    std::ofstream out(dir / "reviewers.jsonl");
    for (const auto& r : c.reviewers) {
      json orgs = json::array();
      for (int o : r.organization_ids) orgs.push_back(c.organizations[static_cast<std::size_t>(o)]);
      json j = {{"id", r.id}, {"organizations", orgs}};
      if (r.country) j["country"] = *r.country;
      if (r.h_index) j["h_index"] = *r.h_index;
      if (r.coauthor_ids) {
        json co = json::array();
        for (int p : *r.coauthor_ids) co.push_back(c.people[static_cast<std::size_t>(p)]);
        j["coauthors"] = co;
      }
      if (r.publication_abstracts) j["abstracts"] = *r.publication_abstracts;
      write_jsonl_line(out, j);
    }
  }
  {
    std::ofstream out(dir / "assignments.jsonl");
    for (const auto& a : c.assignments) {
      json j = {{"submission_id", c.submissions[a.submission].id}, {"reviewer_id", c.reviewers[a.reviewer].id}};
      if (a.value) j["expertise"] = *a.value;
      write_jsonl_line(out, j);
    }
  }
  {
    std::ofstream out(dir / "regions.json");
    json j = json::object();
    for (const auto& [country, region] : c.region_map.country_to_region) j[country] = region;
    out << j.dump(2) << '\n';
  }
}

}  // namespace slatelens
