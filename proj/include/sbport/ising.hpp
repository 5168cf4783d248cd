// Fully connected Ising problems: E(s) = -1/2 sum_ij J_ij s_i s_j + sum_i h_i s_i.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace sbport {

/// Spin configuration; every entry is exactly -1 or +1.
using SpinVector = std::vector<std::int8_t>;

/// Largest instance brute_force_ground_state will enumerate.
inline constexpr std::size_t kMaxEnumerationSpins = 26;

/// Matrix-free product with a structured coupling matrix.
class CouplingOperator {
 public:
  virtual ~CouplingOperator() = default;
  /// out = J v with the zero-diagonal J of the owning problem.
  virtual void apply(std::span<const double> v, std::span<double> out) const = 0;
};

/**
 * Dense symmetric Ising instance.
 *
 * The coupling matrix is stored row-major. Construction symmetrizes the input
 * via (J + J^T)/2 and zeroes the diagonal; since s_i^2 == 1 the diagonal only
 * contributes the constant -1/2 sum_i J_ii, which is kept in constant().
 * The matrix is immutable after construction. A CouplingOperator may be
 * attached to speed up apply_couplings on structured instances; it must
 * reproduce the stored matrix.
 */
class IsingProblem {
 public:
  IsingProblem() = default;

  /// Throws std::invalid_argument on size mismatch or non-finite entries.
  IsingProblem(std::size_t n, std::vector<double> couplings, std::vector<double> field);

  /// Zero couplings and zero field.
  static IsingProblem zeros(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double coupling(std::size_t i, std::size_t j) const noexcept { return j_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {j_.data() + i * n_, n_}; }
  std::span<const double> couplings() const noexcept { return j_; }
  std::span<const double> field() const noexcept { return h_; }

  /// Energy dropped when the diagonal was removed at construction.
  double constant() const noexcept { return dropped_constant_; }

  void attach_operator(std::shared_ptr<const CouplingOperator> op) { op_ = std::move(op); }
  const CouplingOperator* coupling_operator() const noexcept { return op_.get(); }

  /// out = J v, through the attached operator when there is one.
  void apply_couplings(std::span<const double> v, std::span<double> out) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> j_;
  std::vector<double> h_;
  double dropped_constant_ = 0.0;
  std::shared_ptr<const CouplingOperator> op_;
};

/// Throws std::invalid_argument if any entry is not -1 or +1.
void validate_spins(std::span<const std::int8_t> spins);

/// Ising energy with the full double-pass sum. Excludes problem.constant().
double energy(const IsingProblem& problem, std::span<const std::int8_t> spins);

struct GroundState {
  SpinVector spins;
  double energy = 0.0;
};

/**
 * Exact minimum over all 2^n configurations.
 *
 * Enumeration follows a reflected Gray code so every step costs O(n). Ties
 * (within a relative 1e-12 of the energy scale) resolve to the
 * lexicographically smallest spin vector with -1 ordered before +1. The
 * search space is split into a fixed number of blocks that may run on
 * `threads` workers; the result does not depend on the thread count.
 */
GroundState brute_force_ground_state(const IsingProblem& problem, unsigned threads = 1);

}  // namespace sbport
