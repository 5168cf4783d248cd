#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sbport/ising.hpp"
#include "support/generators.hpp"

using namespace sbport;
using sbport::testing::random_ising;
using sbport::testing::random_spins;

namespace {

// Pairwise form, written independently of the library's double-pass sum.
double naive_energy(const IsingProblem& p, const SpinVector& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) e -= p.coupling(i, j) * s[i] * s[j];
    e += p.field()[i] * s[i];
  }
  return e;
}

SpinVector spins_of_index(std::uint64_t idx, std::size_t n) {
  SpinVector s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = ((idx >> (n - 1 - i)) & 1U) ? 1 : -1;
  return s;
}

}  // namespace

TEST_CASE("constructor symmetrizes and drops the diagonal") {
  IsingProblem p(2, {3.0, 1.0, 2.0, -1.0}, {0.5, 0.0});
  CHECK(p.coupling(0, 1) == doctest::Approx(1.5));
  CHECK(p.coupling(1, 0) == doctest::Approx(1.5));
  CHECK(p.coupling(0, 0) == 0.0);
  CHECK(p.coupling(1, 1) == 0.0);
  CHECK(p.constant() == doctest::Approx(-0.5 * (3.0 - 1.0)));
}

TEST_CASE("constructor rejects bad input") {
  CHECK_THROWS_AS(IsingProblem(2, {0.0, 1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(IsingProblem(2, {0.0, 1.0, 1.0, 0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(IsingProblem(1, {std::numeric_limits<double>::quiet_NaN()}, {0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(IsingProblem(1, {0.0}, {std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
}

TEST_CASE("energy examples") {
  CHECK(energy(IsingProblem::zeros(4), SpinVector{1, -1, 1, 1}) == 0.0);

  IsingProblem pair(2, {0.0, 1.0, 1.0, 0.0}, {0.0, 0.0});
  CHECK(energy(pair, SpinVector{1, 1}) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(energy(pair, SpinVector{1}), std::invalid_argument);
}

TEST_CASE("energy matches the pairwise oracle") {
  std::mt19937_64 rng(11);
  const auto p = random_ising(3, rng);
  for (int k = 0; k < 20; ++k) {
    const auto s = random_spins(3, rng);
    CHECK(std::abs(energy(p, s) - naive_energy(p, s)) <= 1e-12);
  }
}

TEST_CASE("brute force examples") {
  IsingProblem single(1, {0.0}, {2.0});
  auto gs = brute_force_ground_state(single);
  CHECK(gs.spins == SpinVector{-1});
  CHECK(gs.energy == doctest::Approx(-2.0));

  IsingProblem anti(2, {0.0, -1.0, -1.0, 0.0}, {0.0, 0.0});
  gs = brute_force_ground_state(anti);
  CHECK(gs.spins == SpinVector{-1, 1});
  CHECK(gs.energy == doctest::Approx(-1.0));

  auto zero = brute_force_ground_state(IsingProblem::zeros(5));
  CHECK(zero.spins == SpinVector(5, -1));

  CHECK_THROWS_AS(brute_force_ground_state(IsingProblem::zeros(kMaxEnumerationSpins + 1)),
                  std::invalid_argument);
}

TEST_CASE("brute force equals the minimum over all configurations") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_ising(10, rng);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_idx = 0;
    for (std::uint64_t idx = 0; idx < 1024; ++idx) {
      const double e = naive_energy(p, spins_of_index(idx, 10));
      if (e < best - 1e-12) {
        best = e;
        best_idx = idx;
      }
    }
    const auto gs = brute_force_ground_state(p);
    CHECK(gs.energy == doctest::Approx(best).epsilon(1e-12));
    CHECK(gs.spins == spins_of_index(best_idx, 10));
  }
}

TEST_CASE("brute force is independent of thread count") {
  std::mt19937_64 rng(21);
  const auto p = random_ising(14, rng);
  const auto one = brute_force_ground_state(p, 1);
  const auto four = brute_force_ground_state(p, 4);
  CHECK(one.spins == four.spins);
  CHECK(one.energy == four.energy);
}

TEST_CASE("property: global flip symmetry without field") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = random_ising(8, rng, 0.0);
    auto s = random_spins(8, rng);
    SpinVector flipped(s);
    for (auto& v : flipped) v = static_cast<std::int8_t>(-v);
    CHECK(energy(p, s) == doctest::Approx(energy(p, flipped)).epsilon(1e-12));
  }
}

TEST_CASE("property: permutation invariance") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 7;
    const auto p = random_ising(n, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> j(n * n), h(n);
    for (std::size_t a = 0; a < n; ++a) {
      h[a] = p.field()[perm[a]];
      for (std::size_t b = 0; b < n; ++b) j[a * n + b] = p.coupling(perm[a], perm[b]);
    }
    IsingProblem q(n, j, h);
    const auto s = random_spins(n, rng);
    SpinVector sp(n);
    for (std::size_t a = 0; a < n; ++a) sp[a] = s[perm[a]];
    CHECK(energy(q, sp) == doctest::Approx(energy(p, s)).epsilon(1e-12));
  }
}

TEST_CASE("property: ground state beats random configurations") {
  std::mt19937_64 rng(8);
  const auto p = random_ising(12, rng);
  const auto gs = brute_force_ground_state(p);
  for (int k = 0; k < 1000; ++k) CHECK(gs.energy <= energy(p, random_spins(12, rng)) + 1e-12);
}

TEST_CASE("property: positive scaling scales energy and keeps the argmin") {
  std::mt19937_64 rng(9);
  for (double lambda : {0.01, 0.5, 3.0, 1000.0}) {
    const auto p = random_ising(9, rng);
    std::vector<double> j(p.couplings().begin(), p.couplings().end());
    std::vector<double> h(p.field().begin(), p.field().end());
    for (auto& v : j) v *= lambda;
    for (auto& v : h) v *= lambda;
    IsingProblem q(9, j, h);
    const auto s = random_spins(9, rng);
    CHECK(energy(q, s) == doctest::Approx(lambda * energy(p, s)).epsilon(1e-12));
    CHECK(brute_force_ground_state(q).spins == brute_force_ground_state(p).spins);
  }
}
