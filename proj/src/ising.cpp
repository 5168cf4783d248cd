#include "sbport/ising.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace sbport {

IsingProblem::IsingProblem(std::size_t n, std::vector<double> couplings, std::vector<double> field)
    : n_(n), j_(std::move(couplings)), h_(std::move(field)) {
  if (j_.size() != n_ * n_) {
    throw std::invalid_argument("IsingProblem: coupling matrix has " + std::to_string(j_.size()) +
                                " entries, expected " + std::to_string(n_ * n_));
  }
  if (h_.size() != n_) {
    throw std::invalid_argument("IsingProblem: field has " + std::to_string(h_.size()) +
                                " entries, expected " + std::to_string(n_));
  }
  for (double v : j_) {
    if (!std::isfinite(v)) throw std::invalid_argument("IsingProblem: non-finite coupling");
  }
  for (double v : h_) {
    if (!std::isfinite(v)) throw std::invalid_argument("IsingProblem: non-finite field");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    dropped_constant_ -= 0.5 * j_[i * n_ + i];
    j_[i * n_ + i] = 0.0;
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double avg = 0.5 * (j_[i * n_ + j] + j_[j * n_ + i]);
      j_[i * n_ + j] = avg;
      j_[j * n_ + i] = avg;
    }
  }
}

IsingProblem IsingProblem::zeros(std::size_t n) {
  return IsingProblem(n, std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0));
}

void IsingProblem::apply_couplings(std::span<const double> v, std::span<double> out) const {
  if (v.size() != n_ || out.size() != n_) throw std::invalid_argument("apply_couplings: dimension mismatch");
  if (op_) {
    op_->apply(v, out);
    return;
  }
  const double* __restrict vp = v.data();
  for (std::size_t i = 0; i < n_; ++i) {
    const double* __restrict r = j_.data() + i * n_;
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < n_; ++j) acc += r[j] * vp[j];
    out[i] = acc;
  }
}

void validate_spins(std::span<const std::int8_t> spins) {
  for (auto s : spins) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin entries must be -1 or +1");
  }
}

double energy(const IsingProblem& problem, std::span<const std::int8_t> spins) {
  const std::size_t n = problem.size();
  if (spins.size() != n) {
    throw std::invalid_argument("energy: spin vector has length " + std::to_string(spins.size()) +
                                ", problem has " + std::to_string(n) + " spins");
  }
  double quadratic = 0.0;
  double linear = 0.0;
  const auto h = problem.field();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = problem.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * spins[j];
    quadratic += spins[i] * acc;
    linear += h[i] * spins[i];
  }
  return -0.5 * quadratic + linear;
}

namespace {

// Spin i is +1 iff bit (n-1-i) of the mask is set, so integer order on masks
// is lexicographic order on spin vectors with -1 < +1.
SpinVector spins_from_mask(std::uint64_t mask, std::size_t n) {
  SpinVector s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = ((mask >> (n - 1 - i)) & 1U) ? 1 : -1;
  return s;
}

struct Candidate {
  std::uint64_t mask = 0;
  double energy = 0.0;
};

// Accept `e` if it is clearly lower, or tied within `tol` with a smaller mask.
void offer(Candidate& best, std::uint64_t mask, double e, double tol) {
  if (e < best.energy - tol) {
    best = {mask, e};
  } else if (e <= best.energy + tol && mask < best.mask) {
    best = {mask, std::min(e, best.energy)};
  }
}

class BlockSearch {
 public:
  BlockSearch(const IsingProblem& p, std::size_t low_bits) : p_(p), n_(p.size()), low_bits_(low_bits) {}

  Candidate run(std::uint64_t prefix, double tol) {
    const std::uint64_t base = prefix << low_bits_;
    reset(base);
    Candidate best{base, energy_};
    const std::uint64_t count = std::uint64_t{1} << low_bits_;
    std::uint64_t mask = base;
    for (std::uint64_t g = 1; g < count; ++g) {
      const unsigned bit = static_cast<unsigned>(std::countr_zero(g));
      flip(n_ - 1 - bit);
      mask ^= std::uint64_t{1} << bit;
      if ((g & kResyncMask) == 0) reset(mask);
      offer(best, mask, energy_, tol);
    }
    return best;
  }

 private:
  static constexpr std::uint64_t kResyncMask = (std::uint64_t{1} << 20) - 1;

  void reset(std::uint64_t mask) {
    spins_ = spins_from_mask(mask, n_);
    local_.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto row = p_.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += row[j] * spins_[j];
      local_[i] = acc;
    }
    energy_ = sbport::energy(p_, spins_);
  }

  void flip(std::size_t k) {
    const double sk = spins_[k];
    energy_ += 2.0 * sk * (local_[k] - p_.field()[k]);
    const auto col = p_.row(k);  // symmetric
    const double delta = -2.0 * sk;
    for (std::size_t i = 0; i < n_; ++i) local_[i] += col[i] * delta;
    spins_[k] = static_cast<std::int8_t>(-spins_[k]);
  }

  const IsingProblem& p_;
  std::size_t n_;
  std::size_t low_bits_;
  SpinVector spins_;
  std::vector<double> local_;
  double energy_ = 0.0;
};

}  // namespace

GroundState brute_force_ground_state(const IsingProblem& problem, unsigned threads) {
  const std::size_t n = problem.size();
  if (n > kMaxEnumerationSpins) {
    throw std::invalid_argument("brute_force_ground_state: " + std::to_string(n) +
                                " spins exceeds the enumeration bound of " +
                                std::to_string(kMaxEnumerationSpins));
  }
  if (n == 0) return {};

  double scale = 0.0;
  for (double v : problem.couplings()) scale += 0.5 * std::abs(v);
  for (double v : problem.field()) scale += std::abs(v);
  const double tol = 1e-12 * (scale + 1e-300);

  const std::size_t prefix_bits = std::min<std::size_t>(n, 6);
  const std::size_t low_bits = n - prefix_bits;
  const std::size_t blocks = std::size_t{1} << prefix_bits;
  std::vector<Candidate> results(blocks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    BlockSearch search(problem, low_bits);
    for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      Candidate c = search.run(b, tol);
      c.energy = energy(problem, spins_from_mask(c.mask, n));
      results[b] = c;
    }
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(blocks));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  Candidate best = results.front();
  for (std::size_t b = 1; b < blocks; ++b) offer(best, results[b].mask, results[b].energy, tol);

  GroundState out;
  out.spins = spins_from_mask(best.mask, n);
  out.energy = energy(problem, out.spins);
  return out;
}

}  // namespace sbport
