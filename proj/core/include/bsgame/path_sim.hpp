#pragma once

#include <cstdint>
#include <vector>

#include "bsgame/levy_model.hpp"

namespace bsgame {

// Uniform grid 0 = t_0 < t_1 < ... < t_N = T with t_k = k * dt.
struct TimeGrid {
  TimeGrid(double horizon, int steps);

  double horizon = 0.0;
  int steps = 0;

  double dt() const { return horizon / steps; }
  double time(int k) const { return dt() * k; }
};

struct JumpRecord {
  double time = 0.0;
  double size = 0.0;
};

// Per-path, per-step increments of the joint driving noise:
//   dW   - d-dimensional Brownian increments, Normal(0, dt), layout [path][step][component]
//   dWL  - the Lévy process' own Gaussian part, an independent 1-dim Brownian motion
//   jumps- compound-Poisson jump records (kept for audit; downstream only
//          per-step power sums matter)
//   dY   - compensated power-jump increments, layout [path][step][order-1]:
//            dY^(1) = sigma*dWL + sum of jump sizes - m_1*dt
//            dY^(j) = sum of jump sizes^j - m_j*dt          (j >= 2)
// Layout is path-major, step-minor, component innermost. Bit-identical for a
// fixed (seed, n_paths, grid, d, J_max): every path has its own RNG
// substream keyed by (seed, path index), so growing n_paths or chunking the
// path range never reshuffles earlier paths.
struct PathBundle {
  LevyTriplet triplet;
  TimeGrid grid{1.0, 1};
  int n_paths = 0;
  int dim_w = 0;     // d
  int max_power = 0; // J_max
  std::uint64_t seed = 0;

  std::vector<double> dW;
  std::vector<double> dWL;
  std::vector<std::vector<JumpRecord>> jumps;
  std::vector<double> dY;

  double dw(int path, int step, int component) const {
    return dW[(static_cast<std::size_t>(path) * grid.steps + step) * dim_w + component];
  }
  double dwl(int path, int step) const {
    return dWL[static_cast<std::size_t>(path) * grid.steps + step];
  }
  // order is 1-based: dy(p, k, j) is the increment of Y^(j).
  double dy(int path, int step, int order) const {
    return dY[(static_cast<std::size_t>(path) * grid.steps + step) * max_power + order - 1];
  }
};

inline constexpr std::size_t kDefaultMemoryBudget = 3ull << 30;  // 3 GiB

// Exact joint sampling on the grid: per step, d+1 independent Gaussian
// increments and a compound-Poisson batch (Poisson(total_rate*dt) count,
// i.i.d. sizes from the normalized jump law, uniform times within the step).
// Throws NumericError when the bundle would exceed memory_budget bytes.
PathBundle simulate(const LevyTriplet& triplet, const TimeGrid& grid, int dim_w, int max_power,
                    int n_paths, std::uint64_t seed,
                    std::size_t memory_budget = kDefaultMemoryBudget);

// Caller-provided noise for deterministic fixtures.
struct InjectedNoise {
  int n_paths = 0;
  int dim_w = 0;
  int max_power = 0;
  std::vector<double> dW;   // [path][step][component], may be empty for all zeros
  std::vector<double> dWL;  // [path][step], may be empty for all zeros
  std::vector<std::vector<JumpRecord>> jumps;  // per path, times in (0, T]
};

// Builds a PathBundle from given noise, applying the triplet's compensators.
// Throws std::invalid_argument on shape mismatch or out-of-range jump times.
PathBundle inject_paths(const LevyTriplet& triplet, const TimeGrid& grid,
                        const InjectedNoise& noise);

// Monte Carlo mean of the running level Y^(j)(t_k) = sum_{l<k} dY^(j)_l with
// standard errors, indexed by gridpoint k = 0..N.
struct CumulativeMeanReport {
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> se;
};

CumulativeMeanReport empirical_mean_Y(const PathBundle& bundle, int order);

}  // namespace bsgame
