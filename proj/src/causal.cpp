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

#include "slatelens/causal.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "slatelens/error.hpp"
#include "slatelens/rng.hpp"

namespace slatelens {
namespace {

std::string cell_name(Dimension d, Measure m) {
  return std::string(to_string(d)) + " x " + std::string(to_string(m));
}

bool reviewed(const ReviewCorpus& corpus, std::size_t s, std::size_t r) { return corpus.review_for(s, r) != nullptr; }

std::vector<Dimension> others(Dimension target) {
  std::vector<Dimension> out;
  for (auto d : kAllDimensions) {
    if (d != target) out.push_back(d);
  }
  return out;
}

// Drops all-zero columns, then columns dependent on earlier ones. Column 0
// (the intercept) is always kept.
void prune_columns(Eigen::MatrixXd& x, std::vector<std::string>& names, std::vector<std::string>& zero,
                   std::vector<std::string>& aliased) {
  std::vector<Eigen::Index> nonzero{0};
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    if (x.col(j).cwiseAbs().maxCoeff() > 0.0) nonzero.push_back(j); else zero.push_back(names[static_cast<std::size_t>(j)]);
  }
  Eigen::MatrixXd nz(x.rows(), static_cast<Eigen::Index>(nonzero.size()));
  std::vector<std::string> nz_names;
  for (std::size_t k = 0; k < nonzero.size(); ++k) {
    nz.col(static_cast<Eigen::Index>(k)) = x.col(nonzero[k]);
    nz_names.push_back(names[static_cast<std::size_t>(nonzero[k])]);
  }
  const auto keep = independent_columns(nz);
  std::set<Eigen::Index> kept(keep.begin(), keep.end());
  for (Eigen::Index j = 0; j < nz.cols(); ++j) {
    if (!kept.count(j)) aliased.push_back(nz_names[static_cast<std::size_t>(j)]);
  }
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<std::string> out_names;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = nz.col(keep[k]);
    out_names.push_back(nz_names[static_cast<std::size_t>(keep[k])]);
  }
  x = std::move(out);
  names = std::move(out_names);
}

}  // namespace

std::string_view to_string(TriplePolicy p) noexcept {
  return p == TriplePolicy::all ? "all" : "one-per-submission";
}

std::optional<TriplePolicy> parse_triple_policy(std::string_view s) noexcept {
  if (s == "all") return TriplePolicy::all;
  if (s == "one-per-submission") return TriplePolicy::one_per_submission;
  return std::nullopt;
}

std::string_view to_string(Method m) noexcept { return m == Method::parametric ? "parametric" : "nonparametric"; }

std::optional<Method> parse_method(std::string_view s) noexcept {
  if (s == "parametric") return Method::parametric;
  if (s == "nonparametric") return Method::nonparametric;
  return std::nullopt;
}

std::uint64_t cell_seed(std::uint64_t seed, Dimension d, Measure m) noexcept {
  return derive_seed(seed, 0x100 * (index_of(d) + 1) + index_of(m));
}

OutcomeTable::OutcomeTable(std::vector<PairKey> keys, std::vector<MeasureValues> values)
    : keys_(std::move(keys)), values_(std::move(values)) {
  if (keys_.size() != values_.size()) throw DataError("outcome table: keys and values differ in length");
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const auto& k = keys_[i];
    index_[{k.submission, std::min(k.first, k.second), std::max(k.first, k.second)}] = i;
  }
}

std::optional<std::size_t> OutcomeTable::find(std::size_t submission, std::size_t r1, std::size_t r2) const {
  const auto it = index_.find({submission, std::min(r1, r2), std::max(r1, r2)});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double OutcomeTable::value(std::size_t submission, std::size_t r1, std::size_t r2, Measure m) const {
  const auto i = find(submission, r1, r2);
  if (!i) throw DataError("no outcome recorded for a reviewer pair of submission index " + std::to_string(submission));
  return values_[*i][index_of(m)];
}

std::vector<SlateTriple> build_triples(const ReviewCorpus& corpus, const TreatmentTable& table, Dimension d,
                                       TriplePolicy policy) {
  std::vector<SlateTriple> out;
  for (std::size_t s = 0; s < corpus.submissions.size(); ++s) {
    std::vector<std::size_t> slate;
    for (auto r : corpus.submissions[s].reviewers) {
      if (reviewed(corpus, s, r)) slate.push_back(r);
    }
    std::vector<SlateTriple> found;
    for (auto a : slate) {
      for (auto b : slate) {
        if (b == a || table.delta(s, a, b, d) != 1) continue;
        for (auto c : slate) {
          if (c == a || c == b || table.delta(s, a, c, d) != -1) continue;
          found.push_back({s, a, b, c});
        }
      }
    }
    const auto& rv = corpus.reviewers;
    std::sort(found.begin(), found.end(), [&](const SlateTriple& x, const SlateTriple& y) {
      return std::tie(rv[x.anchor].id, rv[x.diverse].id, rv[x.non_diverse].id) <
             std::tie(rv[y.anchor].id, rv[y.diverse].id, rv[y.non_diverse].id);
    });
    if (policy == TriplePolicy::one_per_submission && !found.empty()) found.resize(1);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::vector<std::string> ProfileEncoding::names(const ReviewCorpus& corpus) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < organizations; ++i) out.push_back("org:" + corpus.organizations[i]);
  for (std::size_t i = 0; i < regions; ++i) {
    out.push_back("region:" + (i < corpus.region_map.regions.size() ? corpus.region_map.regions[i] : std::to_string(i)));
  }
  out.push_back("seniority:junior");
  out.push_back("seniority:senior");
  for (std::size_t i = 0; i < topics; ++i) out.push_back("topic:" + std::to_string(i));
  return out;
}

void ProfileEncoding::encode(const ProfileVectors& p, Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  for (int o : p.organizations) out[o] = 1.0;
  const auto region_base = static_cast<Eigen::Index>(organizations);
  if (p.region) out[region_base + *p.region] = 1.0;
  const auto sen_base = region_base + static_cast<Eigen::Index>(regions);
  if (p.seniority) out[sen_base + *p.seniority] = 1.0;
  const auto topic_base = sen_base + 2;
  if (p.topics && topics > 0) {
    if (static_cast<std::size_t>(p.topics->size()) != topics) throw DataError("topic vectors differ in length");
    out.segment(topic_base, static_cast<Eigen::Index>(topics)) = *p.topics;
  }
}

ProfileEncoding profile_encoding(const ReviewCorpus& corpus, const TreatmentTable& table) {
  ProfileEncoding e;
  e.organizations = corpus.organizations.size();
  for (const auto& p : table.profiles) {
    if (p.topics) {
      e.topics = static_cast<std::size_t>(p.topics->size());
      break;
    }
  }
  return e;
}

std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& x, double tolerance) {
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double norm = x.col(j).norm();
    if (norm == 0.0) continue;
    Eigen::VectorXd v = x.col(j);
    // Two passes of modified Gram-Schmidt for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    const double rest = v.norm();
    if (rest > tolerance * norm) {
      basis.push_back(v / rest);
      keep.push_back(j);
    }
  }
  return keep;
}

DifferenceDesign build_difference_design(const ReviewCorpus& corpus, const TreatmentTable& table,
                                         const std::vector<SlateTriple>& triples, Dimension d) {
  DifferenceDesign design;
  design.dimension = d;
  for (const auto& t : triples) {
    if (corpus.expertise(t.submission, t.diverse) && corpus.expertise(t.submission, t.non_diverse)) {
      design.triples.push_back(t);
    } else {
      ++design.dropped_missing_expertise;
    }
  }
  const auto enc = profile_encoding(corpus, table);
  const auto other = others(d);
  std::vector<std::string> names{"intercept"};
  for (auto o : other) names.push_back("delta:" + std::string(to_string(o)));
  for (const auto& n : enc.names(corpus)) names.push_back("profile:" + n);
  names.push_back("expertise");

  const auto rows = static_cast<Eigen::Index>(design.triples.size());
  const auto cols = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd p2(static_cast<Eigen::Index>(enc.size()));
  Eigen::VectorXd p3(static_cast<Eigen::Index>(enc.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& t = design.triples[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    Eigen::Index c = 1;
    for (auto o : other) {
      x(i, c++) = table.delta(t.submission, t.anchor, t.diverse, o) - table.delta(t.submission, t.anchor, t.non_diverse, o);
    }
    enc.encode(table.profiles[t.diverse], p2);
    enc.encode(table.profiles[t.non_diverse], p3);
    x.row(i).segment(c, p2.size()) = (p2 - p3).transpose();
    c += p2.size();
    x(i, c) = *corpus.expertise(t.submission, t.diverse) - *corpus.expertise(t.submission, t.non_diverse);
  }
  if (rows > 0) prune_columns(x, names, design.pruned_zero, design.aliased);
  design.x = std::move(x);
  design.columns = std::move(names);
  return design;
}

Eigen::VectorXd difference_outcomes(const DifferenceDesign& design, const OutcomeTable& outcomes, Measure m) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(design.triples.size()));
  for (std::size_t i = 0; i < design.triples.size(); ++i) {
    const auto& t = design.triples[i];
    y[static_cast<Eigen::Index>(i)] =
        outcomes.value(t.submission, t.anchor, t.diverse, m) - outcomes.value(t.submission, t.anchor, t.non_diverse, m);
  }
  return y;
}

ParametricResult estimate_parametric(const DifferenceDesign& design, const OutcomeTable& outcomes, Measure m,
                                     const ParametricOptions& options) {
  const auto n = design.triples.size();
  if (n < options.min_triples || n == 0) {
    throw EstimationError("parametric: " + std::to_string(n) + " triples, below the floor of " +
                          std::to_string(options.min_triples));
  }
  const auto cols = static_cast<std::size_t>(design.x.cols());
  if (n < cols + std::max<std::size_t>(options.min_residual_dof, 1)) {
    throw EstimationError("parametric: " + std::to_string(n) + " triples for " + std::to_string(cols) +
                          " design columns; need " + std::to_string(options.min_residual_dof) +
                          " residual degrees of freedom");
  }
  const Eigen::VectorXd y = difference_outcomes(design, outcomes, m);
  const Eigen::VectorXd w = options.weights ? *options.weights : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  ParametricResult r;
  try {
    r.fit = stats::fit_wls(design.x, y, w);
  } catch (const stats::RankDeficientError& e) {
    std::string cols;
    for (auto c : e.columns()) cols += (cols.empty() ? "" : ", ") + design.columns[static_cast<std::size_t>(c)];
    throw EstimationError("parametric: rank-deficient design; collinear columns: " + cols);
  }
  auto& est = r.estimate;
  est.dimension = design.dimension;
  est.outcome = m;
  est.method = Method::parametric;
  est.gamma = r.fit.coefficients[0];
  est.se = r.fit.std_errors[0];
  est.p = r.fit.p_values[0];
  est.n = n;
  return r;
}

PropensityModel fit_propensity(const ReviewCorpus& corpus, const TreatmentTable& table, Dimension d, double l2) {
  PropensityModel model;
  model.dimension = d;
  for (std::size_t s = 0; s < corpus.submissions.size(); ++s) {
    std::vector<std::size_t> slate;
    for (auto r : corpus.submissions[s].reviewers) {
      if (reviewed(corpus, s, r)) slate.push_back(r);
    }
    for (auto a : slate) {
      std::vector<PropensityRow> arms;
      bool pos = false, neg = false;
      for (auto b : slate) {
        if (b == a) continue;
        const int delta = table.delta(s, a, b, d);
        if (delta == 0) continue;
        if (!corpus.expertise(s, b)) {
          ++model.dropped_missing_expertise;
          continue;
        }
        pos |= delta == 1;
        neg |= delta == -1;
        arms.push_back({s, a, b, delta, 0.0});
      }
      if (pos && neg) model.rows.insert(model.rows.end(), arms.begin(), arms.end());
    }
  }
  if (model.rows.empty()) throw EstimationError("propensity: no anchored diverse/non-diverse arms");

  const auto enc = profile_encoding(corpus, table);
  const auto other = others(d);
  std::vector<std::string> names{"intercept"};
  for (const auto& n : enc.names(corpus)) names.push_back("profile:" + n);
  names.push_back("expertise");
  for (auto o : other) names.push_back("delta:" + std::string(to_string(o)));

  const auto rows = static_cast<Eigen::Index>(model.rows.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(names.size()));
  Eigen::VectorXd labels(rows);
  Eigen::VectorXd prof(static_cast<Eigen::Index>(enc.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = model.rows[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    enc.encode(table.profiles[r.partner], prof);
    x.row(i).segment(1, prof.size()) = prof.transpose();
    Eigen::Index c = 1 + prof.size();
    x(i, c++) = *corpus.expertise(r.submission, r.partner);
    for (auto o : other) x(i, c++) = table.delta(r.submission, r.anchor, r.partner, o);
    labels[i] = r.delta == 1 ? 1.0 : 0.0;
  }
  std::vector<std::string> zero, aliased;
  prune_columns(x, names, zero, aliased);
  model.columns = names;
  model.fit = stats::fit_logistic(x, labels, l2);
  for (Eigen::Index i = 0; i < rows; ++i) model.rows[static_cast<std::size_t>(i)].score = model.fit.probabilities[i];
  return model;
}

std::vector<Match> propensity_match(const PropensityModel& model, const ReviewCorpus& corpus, double caliper) {
  std::vector<Match> out;
  std::size_t begin = 0;
  const auto& rows = model.rows;
  const auto& rv = corpus.reviewers;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].submission == rows[begin].submission) ++end;
    std::vector<std::pair<double, Match>> candidates;
    for (std::size_t i = begin; i < end; ++i) {
      if (rows[i].delta != 1) continue;
      for (std::size_t j = begin; j < end; ++j) {
        if (rows[j].delta != -1 || rows[j].anchor != rows[i].anchor) continue;
        const double gap = std::abs(rows[i].score - rows[j].score);
        if (gap < caliper) {
          candidates.push_back({gap, {rows[i].submission, rows[i].anchor, rows[i].partner, rows[j].partner,
                                      rows[i].score, rows[j].score}});
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first < y.first;
      return std::tie(rv[x.second.anchor].id, rv[x.second.diverse].id, rv[x.second.non_diverse].id) <
             std::tie(rv[y.second.anchor].id, rv[y.second.diverse].id, rv[y.second.non_diverse].id);
    });
    std::set<std::pair<std::size_t, std::size_t>> used;
    auto key = [](std::size_t a, std::size_t b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (const auto& [gap, m] : candidates) {
      const auto k1 = key(m.anchor, m.diverse);
      const auto k2 = key(m.anchor, m.non_diverse);
      if (used.count(k1) || used.count(k2)) continue;
      used.insert(k1);
      used.insert(k2);
      out.push_back(m);
    }
    begin = end;
  }
  return out;
}

std::vector<std::string> audit_matches(const std::vector<Match>& matches, const ReviewCorpus& corpus,
                                       const TreatmentTable& table, Dimension d, double caliper) {
  std::vector<std::string> violations;
  std::map<std::size_t, std::set<std::pair<std::size_t, std::size_t>>> used;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& m = matches[i];
    const auto tag = "match " + std::to_string(i) + ": ";
    if (!(std::abs(m.p_diverse - m.p_non_diverse) < caliper)) violations.push_back(tag + "propensity gap outside caliper");
    if (m.submission >= corpus.submissions.size()) {
      violations.push_back(tag + "unknown submission");
      continue;
    }
    const auto& slate = corpus.submissions[m.submission].reviewers;
    bool off_slate = false;
    for (auto r : {m.anchor, m.diverse, m.non_diverse}) {
      if (std::find(slate.begin(), slate.end(), r) == slate.end()) off_slate = true;
    }
    if (off_slate) {
      violations.push_back(tag + "reviewer not on the submission's slate");
      continue;
    }
    if (m.diverse == m.non_diverse || m.anchor == m.diverse || m.anchor == m.non_diverse) {
      violations.push_back(tag + "repeated reviewer");
      continue;
    }
    if (table.delta(m.submission, m.anchor, m.diverse, d) != 1) violations.push_back(tag + "diverse arm is not diverse");
    if (table.delta(m.submission, m.anchor, m.non_diverse, d) != -1) violations.push_back(tag + "non-diverse arm is not non-diverse");
    auto& u = used[m.submission];
    for (auto partner : {m.diverse, m.non_diverse}) {
      if (!u.insert({std::min(m.anchor, partner), std::max(m.anchor, partner)}).second) {
        violations.push_back(tag + "reviewer pair reused");
      }
    }
  }
  return violations;
}

EffectEstimate estimate_nonparametric(const std::vector<Match>& matches, const OutcomeTable& outcomes, Measure m,
                                      Dimension d, std::int64_t permutations, std::uint64_t seed, bool parallel) {
  if (matches.empty()) throw EstimationError("nonparametric: no matched pairs");
  std::vector<double> diffs;
  diffs.reserve(matches.size());
  for (const auto& x : matches) {
    diffs.push_back(outcomes.value(x.submission, x.anchor, x.diverse, m) -
                    outcomes.value(x.submission, x.anchor, x.non_diverse, m));
  }
  const auto test = parallel
                        ? stats::permutation_test_paired(diffs, permutations, seed, stats::PermutationMode::sampled)
                        : stats::permutation_test_paired_serial(diffs, permutations, seed, stats::PermutationMode::sampled);
  EffectEstimate est;
  est.dimension = d;
  est.outcome = m;
  est.method = Method::nonparametric;
  est.gamma = test.statistic;
  est.p = test.p_value;
  est.n = diffs.size();
  if (diffs.size() > 1) {
    double ss = 0.0;
    for (double v : diffs) ss += (v - est.gamma) * (v - est.gamma);
    est.se = std::sqrt(ss / static_cast<double>(diffs.size() - 1) / static_cast<double>(diffs.size()));
  }
  return est;
}

std::vector<QualityCheck> quality_correlation_check(const ReviewCorpus& corpus, const TreatmentTable& table) {
  std::vector<QualityCheck> out;
  for (auto d : kAllDimensions) {
    QualityCheck q;
    q.dimension = d;
    std::vector<double> diversity, rating;
    for (std::size_t s = 0; s < corpus.submissions.size(); ++s) {
      const auto& slate = corpus.submissions[s].reviewers;
      double rsum = 0.0;
      int rcount = 0;
      for (auto r : slate) {
        if (const auto* rev = corpus.review_for(s, r); rev && rev->meta_rating) {
          rsum += *rev->meta_rating;
          ++rcount;
        }
      }
      if (rcount == 0) continue;
      double dsum = 0.0;
      int pairs = 0;
      for (std::size_t i = 0; i < slate.size(); ++i) {
        for (std::size_t j = i + 1; j < slate.size(); ++j) {
          dsum += table.delta(s, slate[i], slate[j], d);
          ++pairs;
        }
      }
      diversity.push_back(dsum / pairs);
      rating.push_back(rsum / rcount);
    }
    q.slates = diversity.size();
    try {
      if (q.slates < 3) throw DataError("fewer than 3 slates with meta ratings");
      q.correlation = stats::pearson_r(diversity, rating);
    } catch (const std::exception& e) {
      q.error = e.what();
    }
    out.push_back(std::move(q));
  }
  return out;
}

void apply_bh(std::vector<EffectEstimate>& cells, double fdr, double significance) {
  for (auto method : {Method::parametric, Method::nonparametric}) {
    std::vector<std::size_t> idx;
    std::vector<double> p;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].method == method && cells[i].ok()) {
        idx.push_back(i);
        p.push_back(cells[i].p);
      }
    }
    if (p.empty()) continue;
    const auto bh = stats::bh_correct(p, fdr);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto& c = cells[idx[k]];
      c.p_adj = bh.adjusted[k];
      c.significant = c.p_adj <= significance;
    }
  }
}

EffectMatrix run_effect_matrix(const ReviewCorpus& corpus, const TreatmentTable& table, const OutcomeTable& outcomes,
                               const EffectMatrixOptions& options) {
  EffectMatrix result;
  const auto nd = options.dimensions.size();
  std::vector<DifferenceDesign> designs(nd);
  std::vector<std::string> design_errors(nd);
  std::vector<std::vector<Match>> matches(nd);
  std::vector<std::string> match_errors(nd);
  result.diagnostics.resize(nd);

  const auto dims = static_cast<std::ptrdiff_t>(nd);
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (std::ptrdiff_t k = 0; k < dims; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto d = options.dimensions[ku];
    auto& diag = result.diagnostics[ku];
    diag.dimension = d;
    if (options.parametric) {
      try {
        designs[ku] = build_difference_design(corpus, table, build_triples(corpus, table, d, options.policy), d);
        diag.triples = designs[ku].triples.size();
        diag.dropped_missing_expertise = designs[ku].dropped_missing_expertise;
        diag.pruned_zero = designs[ku].pruned_zero;
        diag.aliased = designs[ku].aliased;
      } catch (const std::exception& e) {
        design_errors[ku] = e.what();
      }
    }
    if (options.nonparametric) {
      try {
        const auto model = fit_propensity(corpus, table, d, options.l2);
        diag.propensity_rows = model.rows.size();
        matches[ku] = propensity_match(model, corpus, options.caliper);
        diag.matches = matches[ku].size();
        if (matches[ku].empty()) match_errors[ku] = "nonparametric: no matches within the caliper";
      } catch (const std::exception& e) {
        match_errors[ku] = e.what();
      }
    }
    if (!design_errors[ku].empty()) diag.errors.push_back(design_errors[ku]);
    if (!match_errors[ku].empty()) diag.errors.push_back(match_errors[ku]);
  }

  struct CellSpec {
    Method method;
    std::size_t dim;
    Measure outcome;
  };
  std::vector<CellSpec> specs;
  for (auto method : {Method::parametric, Method::nonparametric}) {
    if ((method == Method::parametric && !options.parametric) || (method == Method::nonparametric && !options.nonparametric)) continue;
    for (std::size_t k = 0; k < nd; ++k) {
      for (auto m : options.outcomes) specs.push_back({method, k, m});
    }
  }
  result.cells.resize(specs.size());
  const auto ncells = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (std::ptrdiff_t i = 0; i < ncells; ++i) {
    const auto& spec = specs[static_cast<std::size_t>(i)];
    const auto d = options.dimensions[spec.dim];
    EffectEstimate est;
    try {
      if (spec.method == Method::parametric) {
        if (!design_errors[spec.dim].empty()) throw EstimationError(design_errors[spec.dim]);
        const ParametricOptions po{options.min_triples, options.min_residual_dof, std::nullopt};
        est = estimate_parametric(designs[spec.dim], outcomes, spec.outcome, po).estimate;
      } else {
        if (!match_errors[spec.dim].empty()) throw EstimationError(match_errors[spec.dim]);
        // The cell loop is already parallel; replicates run serially inside it.
        est = estimate_nonparametric(matches[spec.dim], outcomes, spec.outcome, d, options.permutations,
                                     cell_seed(options.seed, d, spec.outcome), false);
      }
    } catch (const std::exception& e) {
      est = EffectEstimate{};
      est.error = cell_name(d, spec.outcome) + ": " + e.what();
    }
    est.dimension = d;
    est.outcome = spec.outcome;
    est.method = spec.method;
    result.cells[static_cast<std::size_t>(i)] = std::move(est);
  }
  apply_bh(result.cells, options.fdr, options.significance);
  return result;
}

}  // namespace slatelens
