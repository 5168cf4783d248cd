#include "sbport/sb_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace sbport {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("SBParams: ") + name + " must be positive and finite");
  }
}

// out_i = sum_j J_ij v_j
void couple(const IsingProblem& problem, std::span<const double> v, std::vector<double>& out) {
  problem.apply_couplings(v, out);
}

double mean_abs(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return s / static_cast<double>(v.size());
}

TraceSample sample(const IsingProblem& problem, const OscillatorState& state, std::size_t step) {
  return {step, state.t, state.p, mean_abs(state.x), mean_abs(state.y),
          energy(problem, spins_from_positions(state.x))};
}

void check_state(const IsingProblem& problem, const SBParams& params, const OscillatorState& s) {
  validate(params, problem.size());
  if (s.x.size() != problem.size() || s.y.size() != problem.size()) {
    throw std::invalid_argument("oscillator state size does not match problem");
  }
}

using Stepper = void (*)(const IsingProblem&, const SBParams&, double, OscillatorState&, double);

SolveResult run(const IsingProblem& problem, const SBParams& params, OscillatorState state,
                Stepper step_fn) {
  check_state(problem, params, state);
  const double xi0 = resolve_xi0(problem, params);
  const std::size_t steps = total_steps(params);
  const double bound = 10.0 * std::sqrt(params.p_max / params.kerr);
  const std::size_t every = std::max<std::size_t>(params.trace_every, 1);

  SolveResult result;
  if (params.record_trace) result.trace.push_back(sample(problem, state, 0));

  std::size_t step = 0;
  while (step < steps) {
    ++step;
    step_fn(problem, params, xi0, state, pump_schedule(params, step));
    state.t = static_cast<double>(step) * params.dt;

    bool escaped = false;
    for (std::size_t i = 0; i < state.x.size(); ++i) {
      if (!std::isfinite(state.x[i]) || !std::isfinite(state.y[i])) {
        throw std::runtime_error("simulated bifurcation: non-finite oscillator state at step " +
                                 std::to_string(step) + ", spin " + std::to_string(i) +
                                 "; reduce dt or xi0");
      }
      if (std::abs(state.x[i]) > bound) escaped = true;
    }
    if (params.record_trace && (step % every == 0 || step == steps || escaped)) {
      result.trace.push_back(sample(problem, state, step));
    }
    if (escaped) {
      result.diverged = true;
      break;
    }
  }

  result.steps_taken = step;
  result.spins = spins_from_positions(state.x);
  result.energy = energy(problem, result.spins);
  result.final_state = std::move(state);
  return result;
}

}  // namespace

void validate(const SBParams& params, std::size_t n) {
  require_positive(params.kerr, "kerr");
  require_positive(params.pump_step, "pump_step");
  require_positive(params.p_max, "p_max");
  require_positive(params.dt, "dt");
  if (params.xi0) require_positive(*params.xi0, "xi0");
  if (params.detuning.size() != 1 && params.detuning.size() != n) {
    throw std::invalid_argument("SBParams: detuning must have 1 or " + std::to_string(n) +
                                " entries, got " + std::to_string(params.detuning.size()));
  }
  for (double d : params.detuning) require_positive(d, "detuning");
  const double max_detuning = *std::max_element(params.detuning.begin(), params.detuning.end());
  if (!(params.p_max > max_detuning)) {
    throw std::invalid_argument("SBParams: p_max must exceed the largest detuning");
  }
  if (!(params.init_scale >= 0.0) || !std::isfinite(params.init_scale)) {
    throw std::invalid_argument("SBParams: init_scale must be non-negative");
  }
  if (!(params.settle_fraction >= 0.0) || !std::isfinite(params.settle_fraction)) {
    throw std::invalid_argument("SBParams: settle_fraction must be non-negative");
  }
}

double detuning_of(const SBParams& params, std::size_t i) {
  return params.detuning.size() == 1 ? params.detuning.front() : params.detuning[i];
}

double mean_detuning(const SBParams& params) {
  if (params.detuning.empty()) return 0.0;
  return std::accumulate(params.detuning.begin(), params.detuning.end(), 0.0) /
         static_cast<double>(params.detuning.size());
}

double pump_schedule(const SBParams& params, std::size_t step) {
  return std::min(params.pump_step * static_cast<double>(step) * params.dt, params.p_max);
}

double a_of_p(const SBParams& params, double p) {
  return std::sqrt(std::max(p - mean_detuning(params), 0.0) / params.kerr);
}

std::size_t ramp_steps(const SBParams& params) {
  // The small slack keeps exact quotients such as 1 / (0.01 * 0.01) from
  // rounding up by one step.
  const double q = params.p_max / (params.pump_step * params.dt);
  return static_cast<std::size_t>(std::ceil(q * (1.0 - 1e-12)));
}

std::size_t total_steps(const SBParams& params) {
  const std::size_t ramp = ramp_steps(params);
  const double settle = params.settle_fraction * static_cast<double>(ramp);
  return ramp + static_cast<std::size_t>(std::ceil(settle * (1.0 - 1e-12)));
}

double default_xi0(const IsingProblem& problem, const SBParams& params) {
  const std::size_t n = problem.size();
  const double delta = mean_detuning(params);
  if (n >= 2) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = problem.coupling(i, j);
        sum += v;
        sum_sq += v * v;
      }
    }
    const double count = static_cast<double>(n * (n - 1));
    const double mean = sum / count;
    const double sigma = std::sqrt(std::max(sum_sq / count - mean * mean, 0.0));
    if (sigma > 0.0) return kXi0Scale * delta / (sigma * std::sqrt(static_cast<double>(n)));
  }
  double rms = 0.0;
  for (double v : problem.field()) rms += v * v;
  if (n > 0) rms = std::sqrt(rms / static_cast<double>(n));
  if (rms > 0.0) return kXi0Scale * delta / (rms * std::sqrt(static_cast<double>(n)));
  return kXi0Scale * delta;
}

double resolve_xi0(const IsingProblem& problem, const SBParams& params) {
  return params.xi0 ? *params.xi0 : default_xi0(problem, params);
}

OscillatorState initial_state(std::size_t n, const SBParams& params) {
  OscillatorState s;
  s.x.resize(n);
  s.y.resize(n);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> dist(-params.init_scale, params.init_scale);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = params.init_scale > 0.0 ? dist(rng) : 0.0;
    s.y[i] = params.init_scale > 0.0 ? dist(rng) : 0.0;
  }
  return s;
}

SpinVector spins_from_positions(std::span<const double> x) {
  SpinVector s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] < 0.0 ? -1 : 1;
  return s;
}

void symplectic_euler_step(const IsingProblem& problem, const SBParams& params, double xi0,
                           OscillatorState& state, double p_next) {
  const std::size_t n = problem.size();
  const double dt = params.dt;
  for (std::size_t i = 0; i < n; ++i) state.x[i] += detuning_of(params, i) * state.y[i] * dt;

  thread_local std::vector<double> jx;
  jx.resize(n);
  couple(problem, state.x, jx);
  const double field_scale = 2.0 * xi0 * a_of_p(params, p_next);
  const auto h = problem.field();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = state.x[i];
    const double force = params.kerr * x * x * x + (detuning_of(params, i) - p_next) * x -
                         xi0 * jx[i] + field_scale * h[i];
    state.y[i] -= force * dt;
  }
  state.p = p_next;
}

void midpoint_step(const IsingProblem& problem, const SBParams& params, double xi0,
                   OscillatorState& state, double p_next) {
  const std::size_t n = problem.size();
  const double field_scale = 2.0 * xi0 * a_of_p(params, p_next);
  const auto h = problem.field();
  thread_local std::vector<double> jx, jy, dx, dy, xm, ym;
  jx.resize(n);
  jy.resize(n);
  dx.resize(n);
  dy.resize(n);

  auto derivative = [&](std::span<const double> x, std::span<const double> y) {
    couple(problem, x, jx);
    couple(problem, y, jy);
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = x[i] * x[i] + y[i] * y[i];
      const double d = detuning_of(params, i);
      dx[i] = (params.kerr * r2 + p_next + d) * y[i] - 0.5 * xi0 * jy[i];
      dy[i] = -(params.kerr * r2 - p_next + d) * x[i] + xi0 * jx[i] - field_scale * h[i];
    }
  };

  derivative(state.x, state.y);
  xm.resize(n);
  ym.resize(n);
  const double half = 0.5 * params.dt;
  for (std::size_t i = 0; i < n; ++i) {
    xm[i] = state.x[i] + half * dx[i];
    ym[i] = state.y[i] + half * dy[i];
  }
  derivative(xm, ym);
  for (std::size_t i = 0; i < n; ++i) {
    state.x[i] += params.dt * dx[i];
    state.y[i] += params.dt * dy[i];
  }
  state.p = p_next;
}

SolveResult evolve(const IsingProblem& problem, const SBParams& params) {
  validate(params, problem.size());
  return run(problem, params, initial_state(problem.size(), params), &symplectic_euler_step);
}

SolveResult evolve_from(const IsingProblem& problem, const SBParams& params, OscillatorState state) {
  return run(problem, params, std::move(state), &symplectic_euler_step);
}

SolveResult evolve_full(const IsingProblem& problem, const SBParams& params) {
  validate(params, problem.size());
  return run(problem, params, initial_state(problem.size(), params), &midpoint_step);
}

SolveResult evolve_full_from(const IsingProblem& problem, const SBParams& params,
                             OscillatorState state) {
  return run(problem, params, std::move(state), &midpoint_step);
}

double classical_hamiltonian(const IsingProblem& problem, const OscillatorState& state,
                             const SBParams& params) {
  check_state(problem, params, state);
  const std::size_t n = problem.size();
  const double xi0 = resolve_xi0(problem, params);
  const double a = a_of_p(params, state.p);
  const auto h = problem.field();

  double local = 0.0;
  double field = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x2 = state.x[i] * state.x[i];
    const double y2 = state.y[i] * state.y[i];
    const double r2 = x2 + y2;
    local += 0.25 * params.kerr * r2 * r2 - 0.5 * state.p * (x2 - y2) +
             0.5 * detuning_of(params, i) * r2;
    field += h[i] * state.x[i];
  }
  std::vector<double> jx(n), jy(n);
  couple(problem, state.x, jx);
  couple(problem, state.y, jy);
  double coupling = 0.0;
  for (std::size_t i = 0; i < n; ++i) coupling += state.x[i] * jx[i] + state.y[i] * jy[i];
  return local - 0.5 * xi0 * coupling + 2.0 * xi0 * a * field;
}

RestartResult solve_best_of(const IsingProblem& problem, const SBParams& params,
                            std::size_t restarts, unsigned threads, Integrator integrator) {
  if (restarts == 0) throw std::invalid_argument("solve_best_of: restarts must be at least 1");
  validate(params, problem.size());

  std::vector<SolveResult> results(restarts);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next.fetch_add(1); r < restarts; r = next.fetch_add(1)) {
      SBParams p = params;
      p.seed = params.seed + r;
      results[r] = integrator == Integrator::kSymplecticEuler ? evolve(problem, p)
                                                              : evolve_full(problem, p);
    }
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(restarts));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  RestartResult out;
  out.energies.reserve(restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    out.energies.push_back(results[r].energy);
    if (r == 0 || results[r].energy < results[out.best_index].energy) out.best_index = r;
  }
  out.best_seed = params.seed + out.best_index;
  out.best = std::move(results[out.best_index]);
  return out;
}

}  // namespace sbport
