#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "sbport/market.hpp"

using namespace sbport;

namespace {

double cross_mean(const MarketScenario& s, std::size_t t) {
  double m = 0.0;
  for (double v : s.mu(t)) m += v;
  return m / static_cast<double>(s.n_assets());
}

}  // namespace

TEST_CASE("returns are recentred to the configured drift") {
  MarketConfig c;
  c.horizon = 4;
  c.seed = 3;
  const auto zero = generate_scenario(c);
  for (std::size_t t = 0; t < 4; ++t) CHECK(std::abs(cross_mean(zero, t)) <= 1e-12);

  c.drift = 0.005;
  const auto half = generate_scenario(c);
  for (std::size_t t = 0; t < 4; ++t) CHECK(std::abs(cross_mean(half, t) - 0.005) <= 1e-12);
}

TEST_CASE("scenarios are reproducible from the seed") {
  MarketConfig c;
  c.n_assets = 4;
  c.horizon = 3;
  c.seed = 11;
  const auto a = generate_scenario(c);
  const auto b = generate_scenario(c);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(std::equal(a.mu(t).begin(), a.mu(t).end(), b.mu(t).begin()));
    CHECK(std::equal(a.sigma(t).begin(), a.sigma(t).end(), b.sigma(t).begin()));
  }
  c.seed = 12;
  const auto other = generate_scenario(c);
  CHECK_FALSE(std::equal(a.mu(0).begin(), a.mu(0).end(), other.mu(0).begin()));
}

TEST_CASE("covariances are symmetric positive semidefinite and of the right size") {
  MarketConfig c;
  c.n_assets = 6;
  c.horizon = 3;
  c.seed = 5;
  const auto s = generate_scenario(c);
  for (std::size_t t = 0; t < 3; ++t) {
    Eigen::MatrixXd m(6, 6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.cov(t, i, j);
        CHECK(s.cov(t, i, j) == s.cov(t, j, i));
      }
      // Simple-return variance of a GBM increment with v = 0.02 sits near v^2.
      CHECK(s.cov(t, i, i) > 0.25 * 0.02 * 0.02);
      CHECK(s.cov(t, i, i) < 4.0 * 0.02 * 0.02);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("common factor produces positive correlation") {
  MarketConfig c;
  c.n_assets = 3;
  c.correlation = 0.8;
  c.n_increments = 4000;
  c.seed = 8;
  const auto s = generate_scenario(c);
  const double rho = s.cov(0, 0, 1) / std::sqrt(s.cov(0, 0, 0) * s.cov(0, 1, 1));
  CHECK(rho == doctest::Approx(0.8).epsilon(0.1));
}

TEST_CASE("seasonal term is added on top of the sampled returns") {
  MarketConfig c;
  c.n_assets = 4;
  c.horizon = 6;
  c.seed = 9;
  c.drift = 0.002;
  const auto plain = generate_scenario(c);
  c.seasonal_amplitude = 0.01;
  c.seasonal_period = 6;
  const auto seasonal = generate_scenario(c);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(std::abs(cross_mean(seasonal, t) - 0.002) <= 1e-12);
    for (std::size_t i = 0; i < 4; ++i) {
      const double expect = 0.01 * std::sin(2.0 * std::numbers::pi * (t / 6.0 + i / 4.0));
      CHECK(std::abs(seasonal.mu(t)[i] - plain.mu(t)[i] - expect) <= 1e-12);
    }
  }
}

TEST_CASE("risk-free asset") {
  MarketConfig c;
  c.risk_free_return = 0.01;
  c.risk_free_asset = 2;
  c.seed = 4;
  const auto s = generate_scenario(c);
  CHECK(s.mu(0)[2] == 0.01);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(s.cov(0, 2, j) == 0.0);
    CHECK(s.cov(0, j, 2) == 0.0);
  }

  PortfolioSpec spec;
  spec.unit_cap = 15;
  Weights w(5, 1);
  w(2, 0) = 15;
  const auto sol = objective(w, s, spec);
  CHECK(sol.risk_term[0] == 0.0);
  CHECK(sol.return_term[0] == doctest::Approx(0.15));

  CHECK_THROWS_AS(add_risk_free(s, 0.01, 5), std::invalid_argument);
}

TEST_CASE("config validation") {
  MarketConfig c;
  c.n_assets = 0;
  CHECK_THROWS_AS(generate_scenario(c), std::invalid_argument);
  c = {};
  c.volatility = 0.0;
  CHECK_THROWS_AS(generate_scenario(c), std::invalid_argument);
  c = {};
  c.correlation = 1.0;
  CHECK_THROWS_AS(generate_scenario(c), std::invalid_argument);
  c = {};
  c.n_increments = 1;
  CHECK_THROWS_AS(generate_scenario(c), std::invalid_argument);
  c = {};
  c.risk_free_return = 0.01;
  c.risk_free_asset = 7;
  CHECK_THROWS_AS(generate_scenario(c), std::invalid_argument);
}
