// Integer trading-trajectory problems and their Ising encoding.
//
// Weights w_it are non-negative integers bounded by a per-asset cap of the
// form 2^B - 1, written as B bits b_ikt with w_it = sum_k 2^k b_ikt and spins
// s = 2b - 1. The cap is therefore a hard constraint of the encoding itself.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbport/ising.hpp"

namespace sbport {

/// Expected returns mu_t (length N) and covariances Sigma_t (N x N, row-major) per period.
class MarketScenario {
 public:
  MarketScenario() = default;

  /// Symmetrizes each Sigma_t. Throws std::invalid_argument on shape
  /// mismatch, non-finite values or a negative variance.
  MarketScenario(std::size_t n_assets, std::vector<std::vector<double>> mu,
                 std::vector<std::vector<double>> sigma);

  std::size_t n_assets() const noexcept { return n_; }
  std::size_t horizon() const noexcept { return mu_.size(); }
  std::span<const double> mu(std::size_t t) const { return mu_.at(t); }
  std::span<const double> sigma(std::size_t t) const { return sigma_.at(t); }
  double cov(std::size_t t, std::size_t i, std::size_t j) const { return sigma_[t][i * n_ + j]; }

  /// Scenario restricted to a single period.
  MarketScenario period(std::size_t t) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<double>> mu_;
  std::vector<std::vector<double>> sigma_;
};

struct PortfolioSpec {
  double gamma = 0.0;        ///< risk aversion
  int unit_cap = 1;          ///< max units per asset; must be 2^B - 1
  double trade_cost = 0.0;   ///< penalty per bit-weighted unit change
  /// Optional per-asset, per-transition costs, row-major N x (T-1); overrides trade_cost.
  std::optional<std::vector<double>> trade_cost_schedule;

  int bits_per_asset() const;
  long total_units(std::size_t n_assets) const { return static_cast<long>(n_assets) * unit_cap; }
  /// Cost for asset i between periods t and t+1.
  double cost(std::size_t n_assets, std::size_t i, std::size_t t) const;
};

/// Throws std::invalid_argument if spec cannot encode scenario.
void validate(const PortfolioSpec& spec, const MarketScenario& scenario);

/// Flat spin index (i, k, t) -> t*(N*B) + k*N + i: time-major, then bit significance.
struct SpinLayout {
  std::size_t n_assets = 0;
  std::size_t bits = 0;
  std::size_t horizon = 0;

  std::size_t total_spins() const noexcept { return n_assets * bits * horizon; }
  std::size_t index(std::size_t asset, std::size_t bit, std::size_t t) const noexcept {
    return t * (n_assets * bits) + bit * n_assets + asset;
  }
  struct Position {
    std::size_t asset, bit, t;
  };
  Position position(std::size_t flat) const noexcept {
    const std::size_t block = n_assets * bits;
    const std::size_t within = flat % block;
    return {within % n_assets, within / n_assets, flat / block};
  }
};

SpinLayout build_layout(const MarketScenario& scenario, const PortfolioSpec& spec);

/// Integer holdings w_it, N x T.
class Weights {
 public:
  Weights() = default;
  Weights(std::size_t n_assets, std::size_t horizon) : n_(n_assets), t_(horizon), w_(n_assets * horizon, 0) {}

  std::size_t n_assets() const noexcept { return n_; }
  std::size_t horizon() const noexcept { return t_; }
  int& operator()(std::size_t i, std::size_t t) { return w_[t * n_ + i]; }
  int operator()(std::size_t i, std::size_t t) const { return w_[t * n_ + i]; }
  std::span<const int> period(std::size_t t) const { return {w_.data() + t * n_, n_}; }
  bool operator==(const Weights&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t t_ = 0;
  std::vector<int> w_;
};

struct IsingEncoding {
  IsingProblem problem;
  SpinLayout layout;
  /// energy(problem, s) + offset == -objective(decode(s)).total_value
  double offset = 0.0;
};

/**
 * Builds the Ising instance whose energy is the negated trajectory value.
 *
 * Within a period, spins (i,k) and (j,l) couple with -(gamma/4) 2^k 2^l
 * Sigma_ij and the field at (i,k) is (gamma/4) sum_jl 2^k 2^l Sigma_ij -
 * 2^(k-1) mu_i. These are the textbook J_t = -(gamma/2) Sigma_hat and
 * h_t = (gamma/2) 1 Sigma_hat - mu_hat halved, so energies are in objective
 * units. Spin (i,k,t) couples ferromagnetically to (i,k,t+1) with c 2^(k-1),
 * an energy gap of c 2^k for a changed bit.
 */
IsingEncoding encode(const MarketScenario& scenario, const PortfolioSpec& spec);

/// w_it = sum_k 2^k (s_(i,k,t) + 1) / 2.
Weights decode(std::span<const std::int8_t> spins, const SpinLayout& layout);

/// Inverse of decode; throws if a weight is outside [0, 2^B - 1].
SpinVector spins_from_weights(const Weights& weights, const SpinLayout& layout);

struct TrajectorySolution {
  Weights weights;
  std::vector<double> return_term;  ///< w_t . mu_t
  std::vector<double> risk_term;    ///< w_t' Sigma_t w_t
  double unit_trade_cost = 0.0;     ///< sum c |w_i,t+1 - w_it|
  double bit_trade_cost = 0.0;      ///< sum c 2^k [bit k changed]
  double total_value = 0.0;         ///< sum_t (return - gamma/2 risk) - bit_trade_cost
};

/// Throws std::invalid_argument on shape mismatch or a weight outside [0, unit_cap].
TrajectorySolution objective(const Weights& weights, const MarketScenario& scenario,
                             const PortfolioSpec& spec);

/// Per-period value: return - gamma/2 risk - bit cost of the move into period t.
std::vector<double> period_values(const TrajectorySolution& solution, const MarketScenario& scenario,
                                  const PortfolioSpec& spec);

/// Number of (asset, transition) pairs whose holding changes.
std::size_t count_weight_changes(const Weights& weights);
/// Sum over assets and transitions of |w_i,t+1 - w_it|.
long total_unit_changes(const Weights& weights);

double objective_of_spins(std::span<const std::int8_t> spins, const IsingEncoding& encoding);
double objective_of_spins(std::span<const std::int8_t> spins, const MarketScenario& scenario,
                          const PortfolioSpec& spec);

}  // namespace sbport
