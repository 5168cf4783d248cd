// Simulated bifurcation: adiabatic evolution of a pumped Kerr-oscillator
// network whose final oscillator signs encode a low-energy Ising state.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbport/ising.hpp"

namespace sbport {

/// Knobs of the oscillator dynamics.
struct SBParams {
  double kerr = 1.0;                   ///< Kerr coefficient K
  std::vector<double> detuning{1.0};   ///< one entry (uniform) or one per spin
  std::optional<double> xi0;           ///< coupling scale; derived from J when unset
  double pump_step = 0.01;             ///< pump increment per unit simulated time
  double p_max = 1.1;                  ///< final pump amplitude
  double dt = 0.01;                    ///< time increment
  double init_scale = 0.1;             ///< initial x, y uniform in [-init_scale, init_scale]
  double settle_fraction = 0.1;        ///< extra steps at p_max, as a fraction of the ramp
  std::uint64_t seed = 0;
  bool record_trace = false;
  std::size_t trace_every = 100;       ///< trace sampling interval in steps
};

/// Throws std::invalid_argument when a parameter is out of range for n spins.
void validate(const SBParams& params, std::size_t n);

double detuning_of(const SBParams& params, std::size_t i);
double mean_detuning(const SBParams& params);

/// min(pump_step * step * dt, p_max).
double pump_schedule(const SBParams& params, std::size_t step);

/// sqrt(max(p - mean detuning, 0) / K).
double a_of_p(const SBParams& params, double p);

/// ceil(p_max / (pump_step * dt)).
std::size_t ramp_steps(const SBParams& params);
std::size_t total_steps(const SBParams& params);

inline constexpr double kXi0Scale = 0.15;

/**
 * kXi0Scale * mean detuning / (sigma_J * sqrt(n)), sigma_J being the standard
 * deviation of the off-diagonal couplings. Problems without couplings use the
 * rms of the field instead; an all-zero problem gets kXi0Scale * mean detuning.
 */
double default_xi0(const IsingProblem& problem, const SBParams& params);
double resolve_xi0(const IsingProblem& problem, const SBParams& params);

struct OscillatorState {
  std::vector<double> x;
  std::vector<double> y;
  double p = 0.0;
  double t = 0.0;
};

/// Uniform samples in [-init_scale, init_scale] from the seeded generator.
OscillatorState initial_state(std::size_t n, const SBParams& params);

struct TraceSample {
  std::size_t step = 0;
  double t = 0.0;
  double p = 0.0;
  double mean_abs_x = 0.0;
  double mean_abs_y = 0.0;
  double energy = 0.0;
};

struct SolveResult {
  SpinVector spins;
  double energy = 0.0;
  std::size_t steps_taken = 0;
  std::vector<TraceSample> trace;
  bool diverged = false;
  OscillatorState final_state;
};

/// sign(x_i) with sign(0) = +1.
SpinVector spins_from_positions(std::span<const double> x);

/// Position-first symplectic Euler step of the simplified dynamics to pump `p_next`.
void symplectic_euler_step(const IsingProblem& problem, const SBParams& params, double xi0,
                           OscillatorState& state, double p_next);

/// Explicit midpoint step of the full (non-separable) equations of motion.
/// The pump is taken as `p_next` over the whole step.
void midpoint_step(const IsingProblem& problem, const SBParams& params, double xi0,
                   OscillatorState& state, double p_next);

/// Simplified-dynamics run from the seeded initial state.
SolveResult evolve(const IsingProblem& problem, const SBParams& params);
SolveResult evolve_from(const IsingProblem& problem, const SBParams& params, OscillatorState state);

/// Full-dynamics reference run; same initialization, schedule and read-out as evolve.
SolveResult evolve_full(const IsingProblem& problem, const SBParams& params);
SolveResult evolve_full_from(const IsingProblem& problem, const SBParams& params,
                             OscillatorState state);

/// Classical Kerr-network Hamiltonian at the state's pump value.
double classical_hamiltonian(const IsingProblem& problem, const OscillatorState& state,
                             const SBParams& params);

enum class Integrator { kSymplecticEuler, kFullMidpoint };

struct RestartResult {
  SolveResult best;
  std::size_t best_index = 0;
  std::uint64_t best_seed = 0;
  std::vector<double> energies;  ///< per restart, in seed order
};

/**
 * Runs `restarts` independent solves with seeds params.seed + r and keeps the
 * lowest energy (earliest restart on ties). Restarts are spread over `threads`
 * workers; the outcome is independent of the worker count.
 */
RestartResult solve_best_of(const IsingProblem& problem, const SBParams& params,
                            std::size_t restarts, unsigned threads = 1,
                            Integrator integrator = Integrator::kSymplecticEuler);

}  // namespace sbport
