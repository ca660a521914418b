#include "bsgame/path_sim.hpp"

#include <cmath>
#include <random>

namespace bsgame {

namespace {

// splitmix64 stream: the path-th output of the stream seeded by `seed`.
// Keying substreams this way keeps path p's draws independent of n_paths.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t path) {
  std::uint64_t z = seed + (path + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Maps a jump time in (0, T] to the step whose interval (t_k, t_{k+1}] holds it.
int step_of(double time, const TimeGrid& grid) {
  const double dt = grid.dt();
  int step = static_cast<int>(std::ceil(time / dt)) - 1;
  if (step < 0) step = 0;
  if (step >= grid.steps) step = grid.steps - 1;
  return step;
}

void compensate_powers(const LevyTriplet& triplet, const TimeGrid& grid, PathBundle& bundle) {
  const int n = bundle.n_paths;
  const int steps = grid.steps;
  const int max_power = bundle.max_power;
  const double dt = grid.dt();
  const MomentTable moments = MomentTable::build(triplet.jumps, std::max(1, max_power));

  bundle.dY.assign(static_cast<std::size_t>(n) * steps * max_power, 0.0);
  for (int p = 0; p < n; ++p) {
    double* dy_path = bundle.dY.data() + static_cast<std::size_t>(p) * steps * max_power;
    // Compensators first, then jump power sums on top.
    for (int k = 0; k < steps; ++k) {
      double* dy = dy_path + static_cast<std::size_t>(k) * max_power;
      dy[0] = triplet.sigma * bundle.dwl(p, k) - moments.value(1) * dt;
      for (int j = 2; j <= max_power; ++j) dy[j - 1] = -moments.value(j) * dt;
    }
    for (const auto& jump : bundle.jumps[p]) {
      double* dy = dy_path + static_cast<std::size_t>(step_of(jump.time, grid)) * max_power;
      double power = jump.size;
      dy[0] += power;
      for (int j = 2; j <= max_power; ++j) {
        power *= jump.size;
        dy[j - 1] += power;
      }
    }
  }
}

}  // namespace

TimeGrid::TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("TimeGrid: horizon must be finite and > 0");
  }
  if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
}

PathBundle simulate(const LevyTriplet& triplet, const TimeGrid& grid, int dim_w, int max_power,
                    int n_paths, std::uint64_t seed, std::size_t memory_budget) {
  if (dim_w < 0) throw std::invalid_argument("simulate: dim_w must be >= 0");
  if (max_power < 1) throw std::invalid_argument("simulate: max_power must be >= 1");
  if (n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");

  const auto validation = validate(triplet);
  if (!validation.valid) throw std::invalid_argument("simulate: " + validation.error);

  const std::size_t cells =
      static_cast<std::size_t>(n_paths) * grid.steps * (dim_w + 1 + max_power);
  if (cells * sizeof(double) > memory_budget) {
    throw NumericError("simulate: path bundle needs " + std::to_string(cells * sizeof(double)) +
                       " bytes, budget is " + std::to_string(memory_budget));
  }

  PathBundle bundle;
  bundle.triplet = triplet;
  bundle.grid = grid;
  bundle.n_paths = n_paths;
  bundle.dim_w = dim_w;
  bundle.max_power = max_power;
  bundle.seed = seed;
  bundle.dW.resize(static_cast<std::size_t>(n_paths) * grid.steps * dim_w);
  bundle.dWL.resize(static_cast<std::size_t>(n_paths) * grid.steps);
  bundle.jumps.resize(n_paths);

  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double total_rate = triplet.jumps.total_rate();

  // Cumulative atom rates for inverse-CDF sampling of atomic jump sizes.
  std::vector<double> atom_cdf;
  if (triplet.jumps.family == JumpSpec::Family::Atoms && total_rate > 0.0) {
    atom_cdf.reserve(triplet.jumps.atoms.size());
    double cum = 0.0;
    for (const auto& atom : triplet.jumps.atoms) {
      cum += atom.rate / total_rate;
      atom_cdf.push_back(cum);
    }
    atom_cdf.back() = 1.0;
  }

  for (int p = 0; p < n_paths; ++p) {
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(p)));
    // Fixed per-path draw order: dW components, dWL, jump count, then per
    // jump (size, intra-step time).
    std::normal_distribution<double> normal(0.0, 1.0);
    std::poisson_distribution<int> poisson(total_rate * dt);
    std::exponential_distribution<double> exp_size(triplet.jumps.decay > 0.0 ? triplet.jumps.decay
                                                                             : 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    double* dw_path = bundle.dW.data() + static_cast<std::size_t>(p) * grid.steps * dim_w;
    double* dwl_path = bundle.dWL.data() + static_cast<std::size_t>(p) * grid.steps;
    auto& jump_list = bundle.jumps[p];

    for (int k = 0; k < grid.steps; ++k) {
      for (int i = 0; i < dim_w; ++i) {
        dw_path[static_cast<std::size_t>(k) * dim_w + i] = sqrt_dt * normal(rng);
      }
      dwl_path[k] = sqrt_dt * normal(rng);

      if (total_rate <= 0.0) continue;
      const int count = poisson(rng);
      for (int c = 0; c < count; ++c) {
        double size = 0.0;
        if (triplet.jumps.family == JumpSpec::Family::Atoms) {
          const double u = uniform(rng);
          std::size_t idx = 0;
          while (idx + 1 < atom_cdf.size() && u > atom_cdf[idx]) ++idx;
          size = triplet.jumps.atoms[idx].size;
        } else {
          size = exp_size(rng);
        }
        // Time uniform on (t_k, t_{k+1}]; recorded for audit only.
        const double time = grid.time(k) + (1.0 - uniform(rng)) * dt;
        jump_list.push_back(JumpRecord{time, size});
      }
    }
  }

  compensate_powers(triplet, grid, bundle);
  return bundle;
}

PathBundle inject_paths(const LevyTriplet& triplet, const TimeGrid& grid,
                        const InjectedNoise& noise) {
  if (noise.n_paths < 1) throw std::invalid_argument("inject_paths: n_paths must be >= 1");
  if (noise.dim_w < 0 || noise.max_power < 1) {
    throw std::invalid_argument("inject_paths: bad dimensions");
  }

  const std::size_t want_dw =
      static_cast<std::size_t>(noise.n_paths) * grid.steps * noise.dim_w;
  const std::size_t want_dwl = static_cast<std::size_t>(noise.n_paths) * grid.steps;
  if (!noise.dW.empty() && noise.dW.size() != want_dw) {
    throw std::invalid_argument("inject_paths: dW has wrong shape");
  }
  if (!noise.dWL.empty() && noise.dWL.size() != want_dwl) {
    throw std::invalid_argument("inject_paths: dWL has wrong shape");
  }
  if (!noise.jumps.empty() && noise.jumps.size() != static_cast<std::size_t>(noise.n_paths)) {
    throw std::invalid_argument("inject_paths: jumps has wrong shape");
  }

  PathBundle bundle;
  bundle.triplet = triplet;
  bundle.grid = grid;
  bundle.n_paths = noise.n_paths;
  bundle.dim_w = noise.dim_w;
  bundle.max_power = noise.max_power;
  bundle.seed = 0;
  bundle.dW = noise.dW.empty() ? std::vector<double>(want_dw, 0.0) : noise.dW;
  bundle.dWL = noise.dWL.empty() ? std::vector<double>(want_dwl, 0.0) : noise.dWL;
  bundle.jumps = noise.jumps.empty()
                     ? std::vector<std::vector<JumpRecord>>(noise.n_paths)
                     : noise.jumps;

  for (const auto& path : bundle.jumps) {
    for (const auto& jump : path) {
      if (!(jump.time > 0.0) || jump.time > grid.horizon) {
        throw std::invalid_argument("inject_paths: jump time outside (0, T]");
      }
    }
  }

  compensate_powers(triplet, grid, bundle);
  return bundle;
}

CumulativeMeanReport empirical_mean_Y(const PathBundle& bundle, int order) {
  if (order < 1 || order > bundle.max_power) {
    throw std::invalid_argument("empirical_mean_Y: order out of range");
  }
  const int n = bundle.n_paths;
  const int steps = bundle.grid.steps;

  CumulativeMeanReport report;
  report.time.resize(steps + 1);
  report.mean.assign(steps + 1, 0.0);
  report.se.assign(steps + 1, 0.0);
  for (int k = 0; k <= steps; ++k) report.time[k] = bundle.grid.time(k);

  std::vector<double> level(n, 0.0);
  for (int k = 1; k <= steps; ++k) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int p = 0; p < n; ++p) {
      level[p] += bundle.dy(p, k - 1, order);
      sum += level[p];
      sum_sq += level[p] * level[p];
    }
    const double mean = sum / n;
    report.mean[k] = mean;
    if (n > 1) {
      const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
      report.se[k] = std::sqrt(var / n);
    }
  }
  return report;
}

}  // namespace bsgame
