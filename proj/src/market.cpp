#include "sbport/market.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbport {

void validate(const MarketConfig& config) {
  if (config.n_assets == 0) throw std::invalid_argument("MarketConfig: n_assets must be positive");
  if (config.horizon == 0) throw std::invalid_argument("MarketConfig: horizon must be positive");
  if (config.n_increments < 2) {
    throw std::invalid_argument("MarketConfig: n_increments must be at least 2");
  }
  if (!(config.volatility > 0.0) || !std::isfinite(config.volatility)) {
    throw std::invalid_argument("MarketConfig: volatility must be positive");
  }
  if (!(config.drift_dispersion >= 0.0)) {
    throw std::invalid_argument("MarketConfig: drift_dispersion must be non-negative");
  }
  if (!(config.correlation >= 0.0 && config.correlation < 1.0)) {
    throw std::invalid_argument("MarketConfig: correlation must lie in [0, 1)");
  }
  if (!(config.seasonal_amplitude >= 0.0)) {
    throw std::invalid_argument("MarketConfig: seasonal_amplitude must be non-negative");
  }
  if (config.seasonal_amplitude > 0.0 && config.seasonal_period == 0) {
    throw std::invalid_argument("MarketConfig: seasonal_period must be positive");
  }
  if (config.risk_free_return && config.risk_free_asset >= config.n_assets) {
    throw std::invalid_argument("MarketConfig: risk_free_asset out of range");
  }
}

MarketScenario generate_scenario(const MarketConfig& config) {
  validate(config);
  const std::size_t n = config.n_assets;
  const std::size_t m = config.n_increments;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> asset_drift(n);
  for (auto& d : asset_drift) d = config.drift_dispersion * normal(rng);

  const double v = config.volatility;
  const double common = std::sqrt(config.correlation);
  const double idio = std::sqrt(1.0 - config.correlation);

  std::vector<std::vector<double>> mus;
  std::vector<std::vector<double>> sigmas;
  std::vector<double> samples(n * m);  // asset-major
  for (std::size_t t = 0; t < config.horizon; ++t) {
    for (std::size_t step = 0; step < m; ++step) {
      const double z_market = normal(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double dw = common * z_market + idio * normal(rng);
        const double log_ret = asset_drift[i] - 0.5 * v * v + v * dw;
        samples[i * m + step] = std::expm1(log_ret);
      }
    }

    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t step = 0; step < m; ++step) s += samples[i * m + step];
      mean[i] = s / static_cast<double>(m);
    }
    std::vector<double> sigma(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t step = 0; step < m; ++step) {
          s += (samples[i * m + step] - mean[i]) * (samples[j * m + step] - mean[j]);
        }
        s /= static_cast<double>(m - 1);
        sigma[i * n + j] = s;
        sigma[j * n + i] = s;
      }
    }

    double cross_mean = 0.0;
    for (double x : mean) cross_mean += x;
    cross_mean /= static_cast<double>(n);
    std::vector<double> mu(n);
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = mean[i] - cross_mean + config.drift;
      if (config.seasonal_amplitude > 0.0) {
        const double phase = static_cast<double>(t) / static_cast<double>(config.seasonal_period) +
                             static_cast<double>(i) / static_cast<double>(n);
        mu[i] += config.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * phase);
      }
    }
    mus.push_back(std::move(mu));
    sigmas.push_back(std::move(sigma));
  }

  MarketScenario scenario(n, std::move(mus), std::move(sigmas));
  if (config.risk_free_return) {
    scenario = add_risk_free(scenario, *config.risk_free_return, config.risk_free_asset);
  }
  return scenario;
}

MarketScenario add_risk_free(const MarketScenario& scenario, double rate, std::size_t asset_index) {
  const std::size_t n = scenario.n_assets();
  if (asset_index >= n) {
    throw std::invalid_argument("add_risk_free: asset index " + std::to_string(asset_index) +
                                " out of range for " + std::to_string(n) + " assets");
  }
  if (!std::isfinite(rate)) throw std::invalid_argument("add_risk_free: rate must be finite");
  std::vector<std::vector<double>> mus;
  std::vector<std::vector<double>> sigmas;
  for (std::size_t t = 0; t < scenario.horizon(); ++t) {
    auto mu = std::vector<double>(scenario.mu(t).begin(), scenario.mu(t).end());
    auto sigma = std::vector<double>(scenario.sigma(t).begin(), scenario.sigma(t).end());
    mu[asset_index] = rate;
    for (std::size_t j = 0; j < n; ++j) {
      sigma[asset_index * n + j] = 0.0;
      sigma[j * n + asset_index] = 0.0;
    }
    mus.push_back(std::move(mu));
    sigmas.push_back(std::move(sigma));
  }
  return MarketScenario(n, std::move(mus), std::move(sigmas));
}

}  // namespace sbport
