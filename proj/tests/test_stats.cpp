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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "slatelens/stats.hpp"

using namespace slatelens;
using namespace slatelens::stats;

namespace {

Eigen::MatrixXd random_design(Rng& rng, int n, int p) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

oracle::Mat rows_of(const Eigen::MatrixXd& x) {
  oracle::Mat m(static_cast<std::size_t>(x.rows()), oracle::Vec(static_cast<std::size_t>(x.cols())));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x(i, j);
  }
  return m;
}

oracle::Vec vec_of(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Two-sided Student t tail by Simpson integration of the density.
double t_tail_oracle(double t, double dof) {
  const double c = std::exp(std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2)) / std::sqrt(dof * M_PI);
  auto pdf = [&](double u) { return c * std::pow(1.0 + u * u / dof, -(dof + 1) / 2); };
  const int n = 200000;
  const double a = std::abs(t);
  const double h = a / n;
  double s = pdf(0) + pdf(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

TEST_CASE("weighted least squares: exact line") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 1, 1, 1, 2;
  const Eigen::VectorXd y = (Eigen::VectorXd(3) << 1, 3, 5).finished();
  const auto fit = fit_wls(x, y, Eigen::VectorXd::Ones(3));
  CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("weighted least squares: rank deficiency names the columns") {
  Rng rng(1);
  Eigen::MatrixXd x = random_design(rng, 20, 3);
  Eigen::MatrixXd dup(20, 4);
  dup << x, x.col(1);
  try {
    fit_wls(dup, Eigen::VectorXd::Ones(20), Eigen::VectorXd::Ones(20));
    FAIL("expected rank deficiency");
  } catch (const RankDeficientError& e) {
    REQUIRE(e.columns().size() == 1);
    CHECK((e.columns()[0] == 1 || e.columns()[0] == 3));
  }
  CHECK_THROWS_AS(fit_wls(x, Eigen::VectorXd::Ones(20), Eigen::VectorXd::Zero(20)), EstimationError);
  CHECK_THROWS_AS(fit_wls(x.topRows(3), Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)), EstimationError);
}

TEST_CASE("weighted least squares matches the normal equations") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_design(rng, 50, 4);
    Eigen::VectorXd y(50);
    Eigen::VectorXd w(50);
    for (int i = 0; i < 50; ++i) {
      y[i] = rng.normal(0, 2);
      w[i] = rng.uniform(0.2, 3.0);
    }
    const auto fit = fit_wls(x, y, w);
    const auto want = oracle::normal_equations(rows_of(x), vec_of(y), vec_of(w));
    for (int j = 0; j < 4; ++j) CHECK(std::abs(fit.coefficients[j] - want[static_cast<std::size_t>(j)]) < 1e-8);

    // Weighted residuals are orthogonal to every column.
    const Eigen::VectorXd g = x.transpose() * w.cwiseProduct(fit.residuals);
    CHECK(g.cwiseAbs().maxCoeff() < 1e-6 * (1.0 + y.cwiseAbs().maxCoeff()));

    // Scaling every weight leaves the coefficients alone.
    const auto scaled = fit_wls(x, y, 7.5 * w);
    CHECK((scaled.coefficients - fit.coefficients).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((scaled.std_errors - fit.std_errors).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("weighted least squares: standard errors and p-values") {
  Rng rng(3);
  const auto x = random_design(rng, 40, 3);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = 0.5 + 0.3 * x(i, 1) + rng.normal();
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(40);
  const auto fit = fit_wls(x, y, w);
  const double s2 = fit.residuals.squaredNorm() / 37.0;
  const Eigen::MatrixXd cov = s2 * (x.transpose() * x).inverse();
  for (int j = 0; j < 3; ++j) {
    CHECK(fit.std_errors[j] == doctest::Approx(std::sqrt(cov(j, j))).epsilon(1e-10));
    const double t = fit.coefficients[j] / fit.std_errors[j];
    CHECK(fit.p_values[j] == doctest::Approx(t_tail_oracle(t, 37.0)).epsilon(1e-7));
  }
  CHECK(fit.dof == 37);
}

TEST_CASE("logistic regression: symmetric data has zero intercept") {
  Eigen::MatrixXd x(8, 2);
  Eigen::VectorXd yv(8);
  const double xs[] = {-2, -1, -0.5, 0.3};
  for (int i = 0; i < 4; ++i) {
    x.row(2 * i) << 1, xs[i];
    x.row(2 * i + 1) << 1, -xs[i];
    yv[2 * i] = i % 2;
    yv[2 * i + 1] = 1 - i % 2;
  }
  const auto fit = fit_logistic(x, yv, 0.0);
  CHECK(std::abs(fit.fit.coefficients[0]) < 1e-6);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK(fit.probabilities[i] > 0.0);
    CHECK(fit.probabilities[i] < 1.0);
  }
}

TEST_CASE("logistic regression: separable data needs a penalty") {
  Eigen::MatrixXd x(6, 2);
  x << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
  const Eigen::VectorXd yv = (Eigen::VectorXd(6) << 0, 0, 0, 1, 1, 1).finished();
  CHECK_THROWS_AS(fit_logistic(x, yv, 0.0), EstimationError);
  const auto fit = fit_logistic(x, yv, 1.0);
  CHECK(fit.fit.coefficients.allFinite());
  CHECK(fit.fit.coefficients[1] > 0.0);
  CHECK_THROWS_AS(fit_logistic(x, Eigen::VectorXd::Ones(6), 1.0), EstimationError);
}

TEST_CASE("logistic regression recovers a known model") {
  const Eigen::Vector3d truth(-0.5, 1.0, -0.75);
  int covered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + static_cast<std::uint64_t>(seed));
    const auto x = random_design(rng, 200, 3);
    Eigen::VectorXd yv(200);
    for (int i = 0; i < 200; ++i) yv[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-x.row(i).dot(truth)))) ? 1 : 0;
    const auto fit = fit_logistic(x, yv, 0.0);
    bool ok = true;
    for (int j = 0; j < 3; ++j) ok = ok && std::abs(fit.fit.coefficients[j] - truth[j]) <= 3.0 * fit.fit.std_errors[j];
    covered += ok ? 1 : 0;
  }
  CHECK(covered >= 95);
}

TEST_CASE("permutation test: fixed values") {
  CHECK(permutation_test_paired(std::vector<double>(12, 0.0), 1000, 1, PermutationMode::sampled).p_value == 1.0);
  CHECK(permutation_test_paired(std::vector<double>(6, 0.0), 0, 1, PermutationMode::exact).p_value == 1.0);
  const auto exact = permutation_test_paired(std::vector<double>(10, 1.0), 0, 1, PermutationMode::exact);
  CHECK(exact.p_value == 2.0 / 1024.0);
  CHECK(exact.statistic == 1.0);
  const auto sampled = permutation_test_paired(std::vector<double>(40, 1.0), 999, 4, PermutationMode::sampled);
  CHECK(sampled.p_value == 1.0 / 1000.0);
  CHECK_THROWS_AS(permutation_test_paired({1.0}, 50, 1, PermutationMode::sampled), EstimationError);
  CHECK_THROWS_AS(permutation_test_paired(std::vector<double>(21, 1.0), 0, 1, PermutationMode::exact),
                  EstimationError);
  CHECK_THROWS_AS(permutation_test_paired({}, 1000, 1, PermutationMode::sampled), EstimationError);
}

TEST_CASE("permutation test: exact mode agrees with brute enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> d(1 + rng.below(12));
    for (auto& v : d) v = std::round(rng.normal() * 4) / 4;
    const double obs = std::abs(std::accumulate(d.begin(), d.end(), 0.0));
    int extreme = 0;
    const int total = 1 << d.size();
    for (int m = 0; m < total; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) s += ((m >> i) & 1) ? d[i] : -d[i];
      extreme += std::abs(s) >= obs - 1e-9 ? 1 : 0;
    }
    CHECK(permutation_test_paired(d, 0, 1, PermutationMode::exact).p_value ==
          doctest::Approx(static_cast<double>(extreme) / total));
  }
}

TEST_CASE("permutation test: serial and parallel agree, lower bound holds") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> d(5 + rng.below(100));
    for (auto& v : d) v = rng.normal(0.1, 1);
    const auto a = permutation_test_paired(d, 2000, 77, PermutationMode::sampled);
    const auto b = permutation_test_paired_serial(d, 2000, 77, PermutationMode::sampled);
    CHECK(a.p_value == b.p_value);
    CHECK(a.p_value >= 1.0 / 2001.0);
    CHECK(a.p_value <= 1.0);
  }
}

TEST_CASE("permutation test: null p-values are uniform") {
  std::vector<double> ps;
  for (int rep = 0; rep < 200; ++rep) {
    Rng rng(500 + static_cast<std::uint64_t>(rep));
    std::vector<double> d(30);
    for (auto& v : d) v = rng.normal();
    ps.push_back(permutation_test_paired(d, 10000, 900 + static_cast<std::uint64_t>(rep), PermutationMode::sampled).p_value);
  }
  CHECK(ks_uniform(ps).p_value > 0.01);
}

TEST_CASE("Benjamini-Hochberg: hand values") {
  auto r = bh_correct({0.01, 0.02, 0.03, 0.04, 0.05}, 0.05);
  CHECK(std::all_of(r.rejected.begin(), r.rejected.end(), [](bool b) { return b; }));
  r = bh_correct({0.5}, 0.05);
  CHECK_FALSE(r.rejected[0]);
  CHECK(r.adjusted[0] == 0.5);
  r = bh_correct({0.001, 0.9}, 0.05);
  CHECK(r.rejected == std::vector<bool>{true, false});
  CHECK(r.adjusted[0] == doctest::Approx(0.002));
  CHECK(r.adjusted[1] == doctest::Approx(0.9));
  CHECK_THROWS_AS(bh_correct({}, 0.05), EstimationError);
  CHECK_THROWS_AS(bh_correct({1.5}, 0.05), EstimationError);
}

TEST_CASE("Benjamini-Hochberg matches the direct formula") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(1 + rng.below(40));
    for (auto& v : p) {
      const double u = rng.uniform();
      v = rng.bernoulli(0.3) ? u * 0.01 : (rng.bernoulli(0.1) ? std::round(u * 10) / 10 : u);
    }
    const double q = rng.uniform(0.01, 0.2);
    const auto got = bh_correct(p, q);
    const auto want = oracle::benjamini_hochberg(p, q);
    CHECK(got.rejected == want.rejected);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(got.adjusted[i] == doctest::Approx(want.adjusted[i]).epsilon(1e-12));

    const auto wider = bh_correct(p, std::min(0.99, q * 1.7));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (got.rejected[i]) CHECK(wider.rejected[i]);
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[i] < p[j]) CHECK(got.adjusted[i] <= got.adjusted[j]);
      }
    }
  }
}

TEST_CASE("Pearson correlation") {
  std::vector<double> x(10);
  std::iota(x.begin(), x.end(), 1.0);
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  CHECK(pearson_r(x, y).r == doctest::Approx(1.0));
  CHECK(pearson_r({-1, 0, 1, 0}, {0, 1, 0, -1}).r == doctest::Approx(0.0));
  CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), EstimationError);

  Rng rng(11);
  std::vector<double> a(20);
  std::vector<double> b(20);
  for (int i = 0; i < 20; ++i) {
    a[static_cast<std::size_t>(i)] = rng.normal();
    b[static_cast<std::size_t>(i)] = 0.4 * a[static_cast<std::size_t>(i)] + rng.normal();
  }
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / 20;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / 20;
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 20; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  const double r = sab / std::sqrt(saa * sbb);
  const auto c = pearson_r(a, b);
  CHECK(std::abs(c.r - r) < 1e-12);
  CHECK(c.p_value == doctest::Approx(t_tail_oracle(r * std::sqrt(18 / (1 - r * r)), 18)).epsilon(1e-7));
}

TEST_CASE("Kolmogorov-Smirnov against the uniform") {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100);
  CHECK(ks_uniform(grid).statistic == doctest::Approx(0.005));
  CHECK(ks_uniform(grid).p_value > 0.99);
  std::vector<double> skew;
  for (int i = 0; i < 100; ++i) skew.push_back(std::pow((i + 0.5) / 100, 3));
  CHECK(ks_uniform(skew).p_value < 1e-6);
}
