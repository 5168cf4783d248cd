// Synthetic market scenarios estimated from geometric Brownian motion paths.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "sbport/portfolio.hpp"

namespace sbport {

struct MarketConfig {
  std::size_t n_assets = 5;
  std::size_t horizon = 1;
  std::size_t n_increments = 1000;   ///< GBM samples per estimate
  double drift = 0.0;                ///< cross-asset mean of mu_t
  double volatility = 0.02;          ///< per-increment GBM volatility
  double drift_dispersion = 0.01;    ///< std-dev of the per-asset GBM drift
  double correlation = 0.3;          ///< loading on a common market factor, in [0, 1)
  double seasonal_amplitude = 0.0;
  std::size_t seasonal_period = 12;
  std::optional<double> risk_free_return;
  std::size_t risk_free_asset = 0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument for non-positive counts, volatility or a bad correlation.
void validate(const MarketConfig& config);

/**
 * One independent GBM resample per period. Each asset follows
 * dS/S = m_i dt + v dW_i over n_increments unit steps, with m_i drawn once per
 * scenario and dW_i sharing a common factor. mu_t is the per-asset mean simple
 * return, recentred so its cross-asset mean is `drift`, plus
 * A sin(2 pi (t/period + i/N)) when seasonal_amplitude > 0. Sigma_t is the
 * sample covariance. When risk_free_return is set, add_risk_free is applied.
 */
MarketScenario generate_scenario(const MarketConfig& config);

/// Asset gets `rate` at every period and zero covariance row/column.
MarketScenario add_risk_free(const MarketScenario& scenario, double rate, std::size_t asset_index);

}  // namespace sbport
