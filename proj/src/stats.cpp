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

#include "slatelens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "slatelens/rng.hpp"

namespace slatelens::stats {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw EstimationError(what);
}

double sigmoid(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Sum of sign-flipped diffs for one replicate; signs drawn from its own stream.
double flipped_sum(const std::vector<double>& diffs, std::uint64_t seed, std::int64_t replicate) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(replicate)));
  double s = 0.0;
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (i % 64 == 0) bits = rng.next();
    s += (bits & 1U) ? diffs[i] : -diffs[i];
    bits >>= 1U;
  }
  return s;
}

double enumerated_sum(const std::vector<double>& diffs, std::uint64_t mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < diffs.size(); ++i) s += ((mask >> i) & 1U) ? -diffs[i] : diffs[i];
  return s;
}

struct PermutationSetup {
  double observed_sum = 0.0;
  double threshold = 0.0;  // |T*| counts as extreme when >= threshold
  std::int64_t replicates = 0;
};

PermutationSetup setup_permutation(const std::vector<double>& diffs, std::int64_t permutations,
                                   PermutationMode mode) {
  require(!diffs.empty(), "permutation test needs at least one difference");
  if (mode == PermutationMode::exact) {
    require(diffs.size() <= 20, "exact permutation test supports at most 20 differences");
  } else {
    require(permutations >= 100, "sampled permutation test needs at least 100 permutations");
  }
  PermutationSetup s;
  for (double d : diffs) s.observed_sum += d;
  double scale = 0.0;
  for (double d : diffs) scale += std::abs(d);
  // Floating-point slack so ties with the observed statistic are counted.
  s.threshold = std::abs(s.observed_sum) - 1e-12 * std::max(scale, 1e-300);
  s.replicates = mode == PermutationMode::exact ? (std::int64_t{1} << diffs.size()) : permutations;
  return s;
}

TestResult finish_permutation(const std::vector<double>& diffs, const PermutationSetup& s, std::int64_t extreme,
                              PermutationMode mode) {
  TestResult r;
  r.statistic = s.observed_sum / static_cast<double>(diffs.size());
  r.replications = s.replicates;
  if (mode == PermutationMode::exact) {
    r.method = "sign-flip exact";
    r.p_value = static_cast<double>(extreme) / static_cast<double>(s.replicates);
  } else {
    r.method = "sign-flip sampled";
    r.p_value = static_cast<double>(extreme + 1) / static_cast<double>(s.replicates + 1);
  }
  r.p_value = std::min(1.0, r.p_value);
  return r;
}

}  // namespace

double t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double normal_two_sided_p(double z) {
  if (!std::isfinite(z)) return 0.0;
  const boost::math::normal dist;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z))));
}

RegressionFit fit_wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  require(y.size() == n && w.size() == n, "fit_wls: X, y and w must have the same number of rows");
  require(n > p, "fit_wls: need more rows than columns");
  require((w.array() > 0.0).all() && w.allFinite(), "fit_wls: weights must be positive and finite");
  require(x.allFinite() && y.allFinite(), "fit_wls: non-finite input");

  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd xs = sw.asDiagonal() * x;
  const Eigen::VectorXd ys = sw.cwiseProduct(y);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::vector<Eigen::Index> dependent;
    for (Eigen::Index k = qr.rank(); k < p; ++k) dependent.push_back(qr.colsPermutation().indices()[k]);
    std::sort(dependent.begin(), dependent.end());
    std::string cols;
    for (auto c : dependent) cols += (cols.empty() ? "" : ", ") + std::to_string(c);
    throw RankDeficientError("fit_wls: rank-deficient design; collinear columns: " + cols, dependent);
  }

  RegressionFit fit;
  fit.coefficients = qr.solve(ys);
  fit.residuals = y - x * fit.coefficients;
  fit.weights = w;
  fit.dof = static_cast<long>(n - p);
  fit.sigma2 = w.dot(fit.residuals.cwiseAbs2()) / static_cast<double>(fit.dof);

  const auto r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();

  const Eigen::VectorXd diag_r = qr.matrixR().diagonal().head(p).cwiseAbs();
  fit.condition = diag_r.maxCoeff() / diag_r.minCoeff();

  fit.std_errors = (fit.sigma2 * cov.diagonal()).cwiseSqrt();
  fit.statistics = fit.coefficients.cwiseQuotient(fit.std_errors);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.p_values[j] = fit.std_errors[j] > 0.0 ? t_two_sided_p(fit.statistics[j], static_cast<double>(fit.dof))
                                              : (fit.coefficients[j] == 0.0 ? 1.0 : 0.0);
  }
  return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, double l2,
                         const LogisticOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  require(labels.size() == n, "fit_logistic: X and labels must have the same number of rows");
  require(l2 >= 0.0, "fit_logistic: l2 must be non-negative");
  require(((labels.array() == 0.0) || (labels.array() == 1.0)).all(), "fit_logistic: labels must be 0 or 1");
  const double positives = labels.sum();
  require(positives > 0.0 && positives < static_cast<double>(n), "fit_logistic: labels contain a single class");

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, l2);
  if (options.unpenalized_column >= 0 && options.unpenalized_column < p) penalty[options.unpenalized_column] = 0.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + e^eta) computed stably
      const double softplus = eta[i] > 0 ? eta[i] + std::log1p(std::exp(-eta[i])) : std::log1p(std::exp(eta[i]));
      ll += labels[i] * eta[i] - softplus;
    }
    return ll - 0.5 * beta.dot(penalty.cwiseProduct(beta));
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prob(n);
  Eigen::MatrixXd hessian(p, p);
  double current = objective(beta);
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < n; ++i) prob[i] = sigmoid(eta[i]);
    const Eigen::VectorXd wts = prob.cwiseProduct((1.0 - prob.array()).matrix());
    const Eigen::VectorXd grad = x.transpose() * (labels - prob) - penalty.cwiseProduct(beta);
    hessian = x.transpose() * wts.asDiagonal() * x;
    hessian.diagonal() += penalty;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-14 * hessian.diagonal().maxCoeff()) {
      throw EstimationError(l2 == 0.0 ? "fit_logistic: singular information matrix (separation?); use l2 > 0"
                                      : "fit_logistic: singular information matrix");
    }
    Eigen::VectorXd step = ldlt.solve(grad);
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double value = objective(candidate);
    while (value < current - 1e-12 * std::abs(current) && scale > 1e-6) {
      scale *= 0.5;
      candidate = beta + scale * step;
      value = objective(candidate);
    }
    const double change = (scale * step).cwiseAbs().maxCoeff();
    beta = candidate;
    current = value;
    if (change < options.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) {
    throw EstimationError(l2 == 0.0
                              ? "fit_logistic: did not converge (data may be separable); use l2 > 0"
                              : "fit_logistic: did not converge within the iteration limit");
  }

  LogisticFit out;
  out.iterations = iter;
  const Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < n; ++i) prob[i] = sigmoid(eta[i]);
  const Eigen::VectorXd wts = prob.cwiseProduct((1.0 - prob.array()).matrix());
  hessian = x.transpose() * wts.asDiagonal() * x;
  hessian.diagonal() += penalty;
  const Eigen::MatrixXd cov = hessian.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  auto& fit = out.fit;
  fit.coefficients = beta;
  fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.statistics = beta.cwiseQuotient(fit.std_errors);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) fit.p_values[j] = normal_two_sided_p(fit.statistics[j]);
  fit.residuals = labels - prob;
  fit.weights = wts;
  fit.dof = static_cast<long>(n - p);
  out.probabilities = prob;
  return out;
}

TestResult permutation_test_paired(const std::vector<double>& diffs, std::int64_t permutations, std::uint64_t seed,
                                   PermutationMode mode) {
  const auto s = setup_permutation(diffs, permutations, mode);
  std::int64_t extreme = 0;
  if (mode == PermutationMode::exact) {
#pragma omp parallel for reduction(+ : extreme) schedule(static)
    for (std::int64_t m = 0; m < s.replicates; ++m) {
      if (std::abs(enumerated_sum(diffs, static_cast<std::uint64_t>(m))) >= s.threshold) ++extreme;
    }
  } else {
#pragma omp parallel for reduction(+ : extreme) schedule(static)
    for (std::int64_t b = 0; b < s.replicates; ++b) {
      if (std::abs(flipped_sum(diffs, seed, b)) >= s.threshold) ++extreme;
    }
  }
  return finish_permutation(diffs, s, extreme, mode);
}

TestResult permutation_test_paired_serial(const std::vector<double>& diffs, std::int64_t permutations,
                                          std::uint64_t seed, PermutationMode mode) {
  const auto s = setup_permutation(diffs, permutations, mode);
  std::int64_t extreme = 0;
  for (std::int64_t b = 0; b < s.replicates; ++b) {
    const double t = mode == PermutationMode::exact ? enumerated_sum(diffs, static_cast<std::uint64_t>(b))
                                                    : flipped_sum(diffs, seed, b);
    if (std::abs(t) >= s.threshold) ++extreme;
  }
  return finish_permutation(diffs, s, extreme, mode);
}

BhResult bh_correct(const std::vector<double>& p_values, double fdr) {
  require(!p_values.empty(), "bh_correct: empty p-value vector");
  require(fdr > 0.0 && fdr < 1.0, "bh_correct: fdr must lie in (0, 1)");
  for (double p : p_values) require(p >= 0.0 && p <= 1.0, "bh_correct: p-values must lie in [0, 1]");

  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });

  BhResult out{std::vector<bool>(m, false), std::vector<double>(m, 1.0)};
  std::size_t k = 0;  // largest rank (1-based) with p_(k) <= k fdr / m
  for (std::size_t rank = 1; rank <= m; ++rank) {
    if (p_values[order[rank - 1]] <= static_cast<double>(rank) * fdr / static_cast<double>(m)) k = rank;
  }
  for (std::size_t rank = 1; rank <= k; ++rank) out.rejected[order[rank - 1]] = true;

  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const double candidate = p_values[order[rank - 1]] * static_cast<double>(m) / static_cast<double>(rank);
    running = std::min(running, candidate);
    out.adjusted[order[rank - 1]] = std::min(1.0, running);
  }
  return out;
}

Correlation pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "pearson_r: vectors differ in length");
  require(x.size() >= 3, "pearson_r: need at least 3 observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0 && syy > 0.0, "pearson_r: constant input");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(c.r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    const double t = c.r * std::sqrt((n - 2.0) / (1.0 - c.r * c.r));
    c.p_value = t_two_sided_p(t, n - 2.0);
  }
  return c;
}

KsResult ks_uniform(std::vector<double> sample) {
  require(!sample.empty(), "ks_uniform: empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  // Asymptotic Kolmogorov tail with the Stephens small-sample correction.
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  double q = 0.0;
  if (lambda < 1e-3) {
    q = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      q += (k % 2 == 1 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
  }
  return {d, std::clamp(q, 0.0, 1.0)};
}

}  // namespace slatelens::stats
