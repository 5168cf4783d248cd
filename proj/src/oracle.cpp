#include "sbport/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace sbport {

namespace {

SpinVector spins_from_mask(std::uint64_t mask, std::size_t n) {
  SpinVector s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = ((mask >> (n - 1 - i)) & 1U) ? 1 : -1;
  return s;
}

struct Best {
  std::uint64_t mask = 0;
  double value = 0.0;
};

void offer(Best& best, std::uint64_t mask, double value, double tol) {
  if (value > best.value + tol) {
    best = {mask, value};
  } else if (value >= best.value - tol && mask < best.mask) {
    best = {mask, std::max(value, best.value)};
  }
}

class TrajectoryWalk {
 public:
  TrajectoryWalk(const MarketScenario& scenario, const PortfolioSpec& spec, const SpinLayout& layout,
                 std::size_t low_bits)
      : scenario_(scenario), spec_(spec), layout_(layout), n_(layout.total_spins()),
        low_bits_(low_bits) {}

  Best run(std::uint64_t prefix, double tol, std::vector<double>* values) {
    const std::uint64_t base = prefix << low_bits_;
    reset(base);
    Best best{base, value_};
    if (values) values->push_back(value_);
    const std::uint64_t count = std::uint64_t{1} << low_bits_;
    std::uint64_t mask = base;
    for (std::uint64_t g = 1; g < count; ++g) {
      const unsigned bit = static_cast<unsigned>(std::countr_zero(g));
      flip(n_ - 1 - bit);
      mask ^= std::uint64_t{1} << bit;
      if ((g & kResyncMask) == 0) reset(mask);
      offer(best, mask, value_, tol);
      if (values) values->push_back(value_);
    }
    return best;
  }

 private:
  static constexpr std::uint64_t kResyncMask = (std::uint64_t{1} << 18) - 1;

  void reset(std::uint64_t mask) {
    weights_ = decode(spins_from_mask(mask, n_), layout_);
    value_ = objective(weights_, scenario_, spec_).total_value;
    const std::size_t n_assets = layout_.n_assets;
    sigma_w_.assign(n_assets * layout_.horizon, 0.0);
    for (std::size_t t = 0; t < layout_.horizon; ++t) {
      for (std::size_t i = 0; i < n_assets; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n_assets; ++j) acc += scenario_.cov(t, i, j) * weights_(j, t);
        sigma_w_[t * n_assets + i] = acc;
      }
    }
  }

  void flip(std::size_t flat) {
    const auto [i, k, t] = layout_.position(flat);
    const std::size_t n_assets = layout_.n_assets;
    const int unit = 1 << k;
    const int old = weights_(i, t);
    const bool was_set = (old & unit) != 0;
    const double delta = was_set ? -unit : unit;

    double change = delta * scenario_.mu(t)[i] -
                    0.5 * spec_.gamma *
                        (2.0 * delta * sigma_w_[t * n_assets + i] + delta * delta * scenario_.cov(t, i, i));
    auto trade = [&](std::size_t other_t, std::size_t transition) {
      const bool other_set = (weights_(i, other_t) & unit) != 0;
      const double gap = spec_.cost(n_assets, i, transition) * unit;
      change -= (other_set != was_set) ? -gap : gap;
    };
    if (t > 0) trade(t - 1, t - 1);
    if (t + 1 < layout_.horizon) trade(t + 1, t);

    value_ += change;
    for (std::size_t j = 0; j < n_assets; ++j) sigma_w_[t * n_assets + j] += scenario_.cov(t, j, i) * delta;
    weights_(i, t) = old + static_cast<int>(delta);
  }

  const MarketScenario& scenario_;
  const PortfolioSpec& spec_;
  const SpinLayout& layout_;
  std::size_t n_;
  std::size_t low_bits_;
  Weights weights_;
  std::vector<double> sigma_w_;
  double value_ = 0.0;
};

double value_scale(const MarketScenario& scenario, const PortfolioSpec& spec) {
  const double cap = spec.unit_cap;
  double scale = 0.0;
  for (std::size_t t = 0; t < scenario.horizon(); ++t) {
    for (double m : scenario.mu(t)) scale += std::abs(m) * cap;
    for (double s : scenario.sigma(t)) scale += 0.5 * spec.gamma * std::abs(s) * cap * cap;
    if (t + 1 < scenario.horizon()) {
      for (std::size_t i = 0; i < scenario.n_assets(); ++i) {
        scale += spec.cost(scenario.n_assets(), i, t) * cap;
      }
    }
  }
  return scale;
}

}  // namespace

EnumerationResult enumerate_best_trajectory(const MarketScenario& scenario, const PortfolioSpec& spec,
                                            bool keep_values, unsigned threads) {
  validate(spec, scenario);
  const SpinLayout layout = build_layout(scenario, spec);
  const std::size_t n = layout.total_spins();
  if (n > kMaxTrajectorySpins) {
    throw std::invalid_argument("enumerate_best_trajectory: " + std::to_string(n) +
                                " spins exceeds the enumeration bound of " +
                                std::to_string(kMaxTrajectorySpins));
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  if (keep_values && total > kMaxSortedValues) {
    throw std::invalid_argument("enumerate_best_trajectory: value export limited to 2^20 entries");
  }

  const double tol = 1e-12 * (value_scale(scenario, spec) + 1e-300);
  const std::size_t prefix_bits = std::min<std::size_t>(n, 6);
  const std::size_t low_bits = n - prefix_bits;
  const std::size_t blocks = std::size_t{1} << prefix_bits;
  std::vector<Best> results(blocks);
  std::vector<std::vector<double>> block_values(keep_values ? blocks : 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    TrajectoryWalk walk(scenario, spec, layout, low_bits);
    for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      Best best = walk.run(b, tol, keep_values ? &block_values[b] : nullptr);
      best.value = objective(decode(spins_from_mask(best.mask, n), layout), scenario, spec).total_value;
      results[b] = best;
    }
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(blocks));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  Best best = results.front();
  for (std::size_t b = 1; b < blocks; ++b) offer(best, results[b].mask, results[b].value, tol);

  EnumerationResult out;
  out.spins = spins_from_mask(best.mask, n);
  out.best = objective(decode(out.spins, layout), scenario, spec);
  out.evaluated = total;
  if (keep_values) {
    out.sorted_values.reserve(total);
    for (auto& v : block_values) out.sorted_values.insert(out.sorted_values.end(), v.begin(), v.end());
    std::sort(out.sorted_values.begin(), out.sorted_values.end());
  }
  return out;
}

std::vector<RiskReturn> random_portfolios(const MarketScenario& scenario, const PortfolioSpec& spec,
                                          std::size_t count, std::uint64_t seed, std::size_t t) {
  if (count == 0) throw std::invalid_argument("random_portfolios: count must be at least 1");
  validate(spec, scenario);
  if (t >= scenario.horizon()) throw std::invalid_argument("random_portfolios: period out of range");
  const std::size_t n = scenario.n_assets();
  const auto mu = scenario.mu(t);

  auto evaluate = [&](const std::vector<int>& w) {
    RiskReturn rr;
    for (std::size_t i = 0; i < n; ++i) {
      rr.ret += w[i] * mu[i];
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += scenario.cov(t, i, j) * w[j];
      rr.risk += w[i] * row;
    }
    return rr;
  };

  std::vector<RiskReturn> out;
  out.reserve(count + n + 2);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> units(0, spec.unit_cap);
  std::vector<int> w(n);
  for (std::size_t s = 0; s < count; ++s) {
    for (auto& wi : w) wi = units(rng);
    out.push_back(evaluate(w));
  }
  out.push_back(evaluate(std::vector<int>(n, 0)));
  out.push_back(evaluate(std::vector<int>(n, spec.unit_cap)));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> single(n, 0);
    single[i] = spec.unit_cap;
    out.push_back(evaluate(single));
  }
  return out;
}

std::vector<std::vector<double>> random_trajectories(const MarketScenario& scenario,
                                                     const PortfolioSpec& spec, std::size_t count,
                                                     std::uint64_t seed) {
  validate(spec, scenario);
  const std::size_t n = scenario.n_assets();
  const std::size_t horizon = scenario.horizon();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> units(0, spec.unit_cap);

  std::vector<std::vector<double>> out;
  out.reserve(count + 2);
  Weights w(n, horizon);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t i = 0; i < n; ++i) w(i, t) = units(rng);
    }
    out.push_back(period_values(objective(w, scenario, spec), scenario, spec));
  }
  Weights zero(n, horizon);
  Weights full(n, horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < n; ++i) full(i, t) = spec.unit_cap;
  }
  out.push_back(period_values(objective(zero, scenario, spec), scenario, spec));
  out.push_back(period_values(objective(full, scenario, spec), scenario, spec));
  return out;
}

TrajectorySolution optimize_trajectory_dp(const MarketScenario& scenario, const PortfolioSpec& spec) {
  validate(spec, scenario);
  const std::size_t n_assets = scenario.n_assets();
  const std::size_t horizon = scenario.horizon();
  const auto radix = static_cast<std::size_t>(spec.unit_cap) + 1;
  std::size_t states = 1;
  for (std::size_t i = 0; i < n_assets; ++i) {
    states *= radix;
    if (states > kMaxDpStates) {
      throw std::invalid_argument("optimize_trajectory_dp: more than " + std::to_string(kMaxDpStates) +
                                  " holdings per period");
    }
  }

  std::vector<int> holdings(states * n_assets);
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t rest = s;
    for (std::size_t i = 0; i < n_assets; ++i) {
      holdings[s * n_assets + i] = static_cast<int>(rest % radix);
      rest /= radix;
    }
  }
  auto period_value = [&](std::size_t t, std::size_t s) {
    const int* w = &holdings[s * n_assets];
    double ret = 0.0;
    double risk = 0.0;
    for (std::size_t i = 0; i < n_assets; ++i) {
      ret += w[i] * scenario.mu(t)[i];
      for (std::size_t j = 0; j < n_assets; ++j) risk += w[i] * scenario.cov(t, i, j) * w[j];
    }
    return ret - 0.5 * spec.gamma * risk;
  };

  std::vector<double> value(states);
  for (std::size_t s = 0; s < states; ++s) value[s] = period_value(0, s);
  std::vector<std::uint32_t> back(horizon * states, 0);
  std::vector<double> next(states);
  for (std::size_t t = 1; t < horizon; ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      const int* w = &holdings[s * n_assets];
      double best = -std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t r = 0; r < states; ++r) {
        const int* v = &holdings[r * n_assets];
        double cost = 0.0;
        // bit-level cost: sum_k 2^k [bit k differs] is the XOR of the holdings
        for (std::size_t i = 0; i < n_assets; ++i) cost += spec.cost(n_assets, i, t - 1) * (v[i] ^ w[i]);
        const double cand = value[r] - cost;
        if (cand > best) {
          best = cand;
          arg = static_cast<std::uint32_t>(r);
        }
      }
      next[s] = best + period_value(t, s);
      back[t * states + s] = arg;
    }
    value.swap(next);
  }

  std::size_t s = static_cast<std::size_t>(std::max_element(value.begin(), value.end()) - value.begin());
  Weights w(n_assets, horizon);
  for (std::size_t t = horizon; t-- > 0;) {
    for (std::size_t i = 0; i < n_assets; ++i) w(i, t) = holdings[s * n_assets + i];
    s = back[t * states + s];
  }
  return objective(w, scenario, spec);
}

LocalOptimum per_time_local_optimal(const MarketScenario& scenario, const PortfolioSpec& spec,
                                    LocalMode mode, const SBParams& sb, std::size_t restarts,
                                    unsigned threads) {
  validate(spec, scenario);
  const std::size_t n_assets = scenario.n_assets();
  const std::size_t per_period_spins = n_assets * static_cast<std::size_t>(spec.bits_per_asset());
  const bool exact_ok = per_period_spins <= kMaxTrajectorySpins;
  if (mode == LocalMode::kExact && !exact_ok) {
    throw std::invalid_argument("per_time_local_optimal: " + std::to_string(per_period_spins) +
                                " spins per period is too large for exact mode");
  }
  const bool heuristic = mode == LocalMode::kHeuristic || !exact_ok;

  PortfolioSpec single = spec;
  single.trade_cost = 0.0;
  single.trade_cost_schedule.reset();

  Weights stacked(n_assets, scenario.horizon());
  for (std::size_t t = 0; t < scenario.horizon(); ++t) {
    const MarketScenario one = scenario.period(t);
    Weights w;
    if (heuristic) {
      const IsingEncoding enc = encode(one, single);
      w = decode(solve_best_of(enc.problem, sb, restarts, threads).best.spins, enc.layout);
    } else {
      w = enumerate_best_trajectory(one, single, false, threads).best.weights;
    }
    for (std::size_t i = 0; i < n_assets; ++i) stacked(i, t) = w(i, 0);
  }
  return {objective(stacked, scenario, spec), heuristic};
}

}  // namespace sbport
