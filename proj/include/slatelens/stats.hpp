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

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slatelens/error.hpp"

namespace slatelens::stats {

struct RegressionFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd statistics;  // t (WLS) or z (logistic)
  Eigen::VectorXd p_values;    // two-sided
  Eigen::VectorXd residuals;
  Eigen::VectorXd weights;
  double sigma2 = 0.0;
  long dof = 0;
  double condition = 1.0;  // ratio of largest to smallest |R_ii| of the QR factor
};

/// Thrown when the design matrix does not have full column rank. `columns`
/// lists the columns the pivoted QR found to be linearly dependent on others.
class RankDeficientError : public EstimationError {
 public:
  RankDeficientError(std::string what, std::vector<Eigen::Index> columns)
      : EstimationError(std::move(what)), columns_(std::move(columns)) {}
  const std::vector<Eigen::Index>& columns() const noexcept { return columns_; }

 private:
  std::vector<Eigen::Index> columns_;
};

/// Weighted least squares, minimizing sum_i w_i (y_i - x_i b)^2 via a
/// column-pivoted Householder QR of sqrt(W) X. Standard errors come from
/// sigma^2 (X' W X)^{-1} with sigma^2 = sum w r^2 / (n - p); p-values use a
/// Student t with n - p degrees of freedom.
RegressionFit fit_wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

struct LogisticOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
  /// Column excluded from the L2 penalty (the intercept); -1 penalizes all.
  Eigen::Index unpenalized_column = 0;
};

struct LogisticFit {
  RegressionFit fit;
  Eigen::VectorXd probabilities;
  int iterations = 0;
};

/// L2-penalized logistic regression by iteratively reweighted least squares
/// (Newton steps with step halving). Labels must be 0/1 with both classes
/// present.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, double l2,
                         const LogisticOptions& options = {});

enum class PermutationMode { exact, sampled };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::int64_t replications = 0;
};

/// Paired sign-flip permutation test of mean(diffs) == 0, two-sided.
/// Sampled mode: p = (1 + #{|T*| >= |T|}) / (P + 1), replicate b drawing its
/// signs from a stream derived from (seed, b). Exact mode enumerates all 2^n
/// sign patterns (n <= 20). Replicates run in parallel with OpenMP.
TestResult permutation_test_paired(const std::vector<double>& diffs, std::int64_t permutations, std::uint64_t seed,
                                   PermutationMode mode);

/// Single-threaded reference of permutation_test_paired; identical results.
TestResult permutation_test_paired_serial(const std::vector<double>& diffs, std::int64_t permutations,
                                          std::uint64_t seed, PermutationMode mode);

struct BhResult {
  std::vector<bool> rejected;
  std::vector<double> adjusted;
};

/// Benjamini-Hochberg step-up procedure at false discovery rate `fdr`.
BhResult bh_correct(const std::vector<double>& p_values, double fdr);

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
};

/// Pearson product-moment correlation; p from t = r sqrt((n-2)/(1-r^2)).
Correlation pearson_r(const std::vector<double>& x, const std::vector<double>& y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1).
KsResult ks_uniform(std::vector<double> sample);

/// Two-sided p-value of a Student t statistic.
double t_two_sided_p(double t, double dof);
double normal_two_sided_p(double z);

}  // namespace slatelens::stats
