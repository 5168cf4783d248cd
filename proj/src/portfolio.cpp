#include "sbport/portfolio.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>

namespace sbport {

MarketScenario::MarketScenario(std::size_t n_assets, std::vector<std::vector<double>> mu,
                               std::vector<std::vector<double>> sigma)
    : n_(n_assets), mu_(std::move(mu)), sigma_(std::move(sigma)) {
  if (n_ == 0) throw std::invalid_argument("MarketScenario: need at least one asset");
  if (mu_.empty()) throw std::invalid_argument("MarketScenario: horizon must be at least 1");
  if (mu_.size() != sigma_.size()) {
    throw std::invalid_argument("MarketScenario: " + std::to_string(mu_.size()) +
                                " return vectors but " + std::to_string(sigma_.size()) +
                                " covariance matrices");
  }
  for (std::size_t t = 0; t < mu_.size(); ++t) {
    if (mu_[t].size() != n_ || sigma_[t].size() != n_ * n_) {
      throw std::invalid_argument("MarketScenario: period " + std::to_string(t) +
                                  " has wrong dimensions");
    }
    for (double v : mu_[t]) {
      if (!std::isfinite(v)) throw std::invalid_argument("MarketScenario: non-finite return");
    }
    auto& s = sigma_[t];
    for (double v : s) {
      if (!std::isfinite(v)) throw std::invalid_argument("MarketScenario: non-finite covariance");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (s[i * n_ + i] < 0.0) throw std::invalid_argument("MarketScenario: negative variance");
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double avg = 0.5 * (s[i * n_ + j] + s[j * n_ + i]);
        s[i * n_ + j] = avg;
        s[j * n_ + i] = avg;
      }
    }
  }
}

MarketScenario MarketScenario::period(std::size_t t) const {
  return MarketScenario(n_, {mu_.at(t)}, {sigma_.at(t)});
}

int PortfolioSpec::bits_per_asset() const {
  if (unit_cap < 1) throw std::invalid_argument("PortfolioSpec: unit_cap must be at least 1");
  const auto cap1 = static_cast<unsigned long>(unit_cap) + 1;
  if (!std::has_single_bit(cap1)) {
    throw std::invalid_argument("PortfolioSpec: unit_cap " + std::to_string(unit_cap) +
                                " is not of the form 2^B - 1 (1, 3, 7, 15, ...)");
  }
  return std::countr_zero(cap1);
}

double PortfolioSpec::cost(std::size_t n_assets, std::size_t i, std::size_t t) const {
  if (trade_cost_schedule) {
    const std::size_t transitions = trade_cost_schedule->size() / n_assets;
    return (*trade_cost_schedule)[i * transitions + t];
  }
  return trade_cost;
}

void validate(const PortfolioSpec& spec, const MarketScenario& scenario) {
  spec.bits_per_asset();
  if (!(spec.gamma >= 0.0) || !std::isfinite(spec.gamma)) {
    throw std::invalid_argument("PortfolioSpec: gamma must be finite and non-negative");
  }
  if (!(spec.trade_cost >= 0.0) || !std::isfinite(spec.trade_cost)) {
    throw std::invalid_argument("PortfolioSpec: trade_cost must be finite and non-negative");
  }
  if (spec.trade_cost_schedule) {
    const std::size_t expected = scenario.n_assets() * (scenario.horizon() - 1);
    if (spec.trade_cost_schedule->size() != expected) {
      throw std::invalid_argument("PortfolioSpec: trade_cost_schedule needs " +
                                  std::to_string(expected) + " entries");
    }
    for (double c : *spec.trade_cost_schedule) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("PortfolioSpec: trade costs must be finite and non-negative");
      }
    }
  }
}

SpinLayout build_layout(const MarketScenario& scenario, const PortfolioSpec& spec) {
  return {scenario.n_assets(), static_cast<std::size_t>(spec.bits_per_asset()), scenario.horizon()};
}

namespace {

// J v without the dense matrix. Within a period J = -(gamma/4) (b b') kron Sigma_t
// minus its diagonal, with b_k = 2^k; between periods only equal bits of the
// same asset couple.
class TrajectoryCoupling final : public CouplingOperator {
 public:
  TrajectoryCoupling(const MarketScenario& scenario, const PortfolioSpec& spec, const SpinLayout& layout)
      : layout_(layout), g4_(0.25 * spec.gamma), scenario_(scenario) {
    const std::size_t transitions = layout.horizon > 0 ? layout.horizon - 1 : 0;
    costs_.resize(layout.n_assets * transitions);
    for (std::size_t t = 0; t < transitions; ++t) {
      for (std::size_t i = 0; i < layout.n_assets; ++i) costs_[t * layout.n_assets + i] = spec.cost(layout.n_assets, i, t);
    }
  }

  void apply(std::span<const double> v, std::span<double> out) const override {
    const std::size_t n_assets = layout_.n_assets;
    const std::size_t bits = layout_.bits;
    std::vector<double> u(n_assets);
    std::vector<double> z(n_assets);
    for (std::size_t t = 0; t < layout_.horizon; ++t) {
      for (std::size_t j = 0; j < n_assets; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < bits; ++l) acc += std::ldexp(v[layout_.index(j, l, t)], static_cast<int>(l));
        u[j] = acc;
      }
      const auto sigma = scenario_.sigma(t);
      for (std::size_t i = 0; i < n_assets; ++i) {
        const double* row = sigma.data() + i * n_assets;
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t j = 0; j < n_assets; ++j) acc += row[j] * u[j];
        z[i] = acc;
      }
      for (std::size_t i = 0; i < n_assets; ++i) {
        const double sii = sigma[i * n_assets + i];
        for (std::size_t k = 0; k < bits; ++k) {
          const std::size_t a = layout_.index(i, k, t);
          const double wk = std::ldexp(1.0, static_cast<int>(k));
          out[a] = -g4_ * wk * (z[i] - wk * sii * v[a]);
        }
      }
    }
    for (std::size_t t = 0; t + 1 < layout_.horizon; ++t) {
      for (std::size_t i = 0; i < n_assets; ++i) {
        const double c = costs_[t * n_assets + i];
        if (c == 0.0) continue;
        for (std::size_t k = 0; k < bits; ++k) {
          const std::size_t a = layout_.index(i, k, t);
          const std::size_t b = layout_.index(i, k, t + 1);
          const double half_gap = 0.5 * c * std::ldexp(1.0, static_cast<int>(k));
          out[a] += half_gap * v[b];
          out[b] += half_gap * v[a];
        }
      }
    }
  }

 private:
  SpinLayout layout_;
  double g4_;
  MarketScenario scenario_;
  std::vector<double> costs_;
};

}  // namespace

IsingEncoding encode(const MarketScenario& scenario, const PortfolioSpec& spec) {
  validate(spec, scenario);
  const SpinLayout layout = build_layout(scenario, spec);
  const std::size_t n_assets = layout.n_assets;
  const std::size_t bits = layout.bits;
  const std::size_t n = layout.total_spins();
  const double g4 = 0.25 * spec.gamma;

  std::vector<double> couplings(n * n, 0.0);
  std::vector<double> field(n, 0.0);
  double offset = 0.0;

  for (std::size_t t = 0; t < layout.horizon; ++t) {
    const auto mu = scenario.mu(t);
    for (std::size_t i = 0; i < n_assets; ++i) {
      for (std::size_t k = 0; k < bits; ++k) {
        const std::size_t a = layout.index(i, k, t);
        const double wk = std::ldexp(1.0, static_cast<int>(k));
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n_assets; ++j) {
          for (std::size_t l = 0; l < bits; ++l) {
            const std::size_t b = layout.index(j, l, t);
            const double q = wk * std::ldexp(1.0, static_cast<int>(l)) * scenario.cov(t, i, j);
            row_sum += q;
            // -1/2 s'Js reproduces gamma/8 s' Sigma_hat s off the diagonal;
            // the diagonal term is constant since s^2 == 1.
            if (a != b) {
              couplings[a * n + b] = -g4 * q;
            } else {
              offset += 0.5 * g4 * q;
            }
            offset += 0.5 * g4 * q;  // gamma/8 1' Sigma_hat 1
          }
        }
        field[a] = g4 * row_sum - 0.5 * wk * mu[i];
        offset -= 0.5 * wk * mu[i];
      }
    }
  }

  for (std::size_t t = 0; t + 1 < layout.horizon; ++t) {
    for (std::size_t i = 0; i < n_assets; ++i) {
      const double c = spec.cost(n_assets, i, t);
      for (std::size_t k = 0; k < bits; ++k) {
        const std::size_t a = layout.index(i, k, t);
        const std::size_t b = layout.index(i, k, t + 1);
        const double half_gap = 0.5 * c * std::ldexp(1.0, static_cast<int>(k));
        couplings[a * n + b] = half_gap;
        couplings[b * n + a] = half_gap;
        offset += half_gap;
      }
    }
  }

  IsingProblem problem(n, std::move(couplings), std::move(field));
  problem.attach_operator(std::make_shared<TrajectoryCoupling>(scenario, spec, layout));
  return {std::move(problem), layout, offset};
}

Weights decode(std::span<const std::int8_t> spins, const SpinLayout& layout) {
  if (spins.size() != layout.total_spins()) {
    throw std::invalid_argument("decode: spin vector has length " + std::to_string(spins.size()) +
                                ", layout expects " + std::to_string(layout.total_spins()));
  }
  validate_spins(spins);
  Weights w(layout.n_assets, layout.horizon);
  for (std::size_t t = 0; t < layout.horizon; ++t) {
    for (std::size_t i = 0; i < layout.n_assets; ++i) {
      int value = 0;
      for (std::size_t k = 0; k < layout.bits; ++k) {
        if (spins[layout.index(i, k, t)] > 0) value |= 1 << k;
      }
      w(i, t) = value;
    }
  }
  return w;
}

SpinVector spins_from_weights(const Weights& weights, const SpinLayout& layout) {
  if (weights.n_assets() != layout.n_assets || weights.horizon() != layout.horizon) {
    throw std::invalid_argument("spins_from_weights: weight matrix does not match layout");
  }
  const int cap = (1 << layout.bits) - 1;
  SpinVector s(layout.total_spins());
  for (std::size_t t = 0; t < layout.horizon; ++t) {
    for (std::size_t i = 0; i < layout.n_assets; ++i) {
      const int w = weights(i, t);
      if (w < 0 || w > cap) {
        throw std::invalid_argument("spins_from_weights: weight " + std::to_string(w) +
                                    " not representable with " + std::to_string(layout.bits) +
                                    " bits");
      }
      for (std::size_t k = 0; k < layout.bits; ++k) {
        s[layout.index(i, k, t)] = ((w >> k) & 1) ? 1 : -1;
      }
    }
  }
  return s;
}

TrajectorySolution objective(const Weights& weights, const MarketScenario& scenario,
                             const PortfolioSpec& spec) {
  validate(spec, scenario);
  const std::size_t n_assets = scenario.n_assets();
  const std::size_t horizon = scenario.horizon();
  if (weights.n_assets() != n_assets || weights.horizon() != horizon) {
    throw std::invalid_argument("objective: weight matrix is " + std::to_string(weights.n_assets()) +
                                "x" + std::to_string(weights.horizon()) + ", scenario is " +
                                std::to_string(n_assets) + "x" + std::to_string(horizon));
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < n_assets; ++i) {
      const int w = weights(i, t);
      if (w < 0 || w > spec.unit_cap) {
        throw std::invalid_argument("objective: weight " + std::to_string(w) + " for asset " +
                                    std::to_string(i) + " at t=" + std::to_string(t) +
                                    " violates cap " + std::to_string(spec.unit_cap));
      }
    }
  }

  TrajectorySolution sol;
  sol.weights = weights;
  sol.return_term.assign(horizon, 0.0);
  sol.risk_term.assign(horizon, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto mu = scenario.mu(t);
    double ret = 0.0;
    double risk = 0.0;
    for (std::size_t i = 0; i < n_assets; ++i) {
      const double wi = weights(i, t);
      ret += wi * mu[i];
      double row = 0.0;
      for (std::size_t j = 0; j < n_assets; ++j) row += scenario.cov(t, i, j) * weights(j, t);
      risk += wi * row;
    }
    sol.return_term[t] = ret;
    sol.risk_term[t] = risk;
    sol.total_value += ret - 0.5 * spec.gamma * risk;
  }
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    for (std::size_t i = 0; i < n_assets; ++i) {
      const double c = spec.cost(n_assets, i, t);
      const int a = weights(i, t);
      const int b = weights(i, t + 1);
      sol.unit_trade_cost += c * std::abs(b - a);
      // sum_k 2^k [bit k differs] is the integer a XOR b.
      sol.bit_trade_cost += c * static_cast<double>(a ^ b);
    }
  }
  sol.total_value -= sol.bit_trade_cost;
  return sol;
}

std::vector<double> period_values(const TrajectorySolution& solution, const MarketScenario& scenario,
                                  const PortfolioSpec& spec) {
  const std::size_t horizon = solution.return_term.size();
  std::vector<double> values(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    values[t] = solution.return_term[t] - 0.5 * spec.gamma * solution.risk_term[t];
    if (t > 0) {
      for (std::size_t i = 0; i < scenario.n_assets(); ++i) {
        const int change = solution.weights(i, t - 1) ^ solution.weights(i, t);
        values[t] -= spec.cost(scenario.n_assets(), i, t - 1) * change;
      }
    }
  }
  return values;
}

std::size_t count_weight_changes(const Weights& weights) {
  std::size_t changes = 0;
  for (std::size_t t = 0; t + 1 < weights.horizon(); ++t) {
    for (std::size_t i = 0; i < weights.n_assets(); ++i) {
      if (weights(i, t) != weights(i, t + 1)) ++changes;
    }
  }
  return changes;
}

long total_unit_changes(const Weights& weights) {
  long units = 0;
  for (std::size_t t = 0; t + 1 < weights.horizon(); ++t) {
    for (std::size_t i = 0; i < weights.n_assets(); ++i) {
      units += std::abs(weights(i, t + 1) - weights(i, t));
    }
  }
  return units;
}

double objective_of_spins(std::span<const std::int8_t> spins, const IsingEncoding& encoding) {
  return -(energy(encoding.problem, spins) + encoding.offset);
}

double objective_of_spins(std::span<const std::int8_t> spins, const MarketScenario& scenario,
                          const PortfolioSpec& spec) {
  return objective_of_spins(spins, encode(scenario, spec));
}

}  // namespace sbport
