#include "bsgame/bsde_solver.hpp"

#include <cmath>
#include <cstdio>

#include "bsgame/common.hpp"
#include "bsgame/regression.hpp"

namespace bsgame {

ControlProcess ControlProcess::zeros(int n_paths, int steps, int dim) {
  ControlProcess u;
  u.n_paths = n_paths;
  u.steps = steps;
  u.dim = dim;
  u.values.assign(static_cast<size_t>(n_paths) * steps * dim, 0.0);
  return u;
}

ControlProcess ControlProcess::constant(int n_paths, int steps, const Eigen::VectorXd& v) {
  ControlProcess u = zeros(n_paths, steps, static_cast<int>(v.size()));
  for (int p = 0; p < n_paths; ++p) {
    for (int k = 0; k < steps; ++k) {
      for (int c = 0; c < u.dim; ++c) u.at(p, k)[c] = v[c];
    }
  }
  return u;
}

Eigen::VectorXd BSDESolution::y0_mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_y);
  for (int p = 0; p < n_paths; ++p) {
    for (int c = 0; c < dim_y; ++c) m[c] += y_at(p, 0, c);
  }
  return m / static_cast<double>(n_paths);
}

namespace {

void check_controls(const ControlProcess& u, int n_paths, int steps, const char* who) {
  if (u.dim == 0) return;
  if (u.n_paths != n_paths || u.steps != steps) {
    throw ConfigError(std::string(who) + ": control sample shape mismatch");
  }
}

}  // namespace

BSDESolution solve_backward(const NoiseLevels& levels, const PathBundle& bundle,
                            const TeugelIncrements& incs, int dim_y, const DriverFn& driver,
                            const TerminalFn& terminal, const ControlProcess& u1,
                            const ControlProcess& u2, const BackwardOptions& opts) {
  if (dim_y <= 0) throw ConfigError("backward solve: dim_y must be positive");
  if (levels.n_paths != bundle.n_paths || incs.n_paths != bundle.n_paths) {
    throw ConfigError("backward solve: path count mismatch");
  }
  if (incs.steps != bundle.grid.steps) {
    throw ConfigError("backward solve: increment step count mismatch");
  }
  const int n = bundle.n_paths;
  const int N = bundle.grid.steps;
  const int d = bundle.dim_w;
  const int K = incs.order;
  const double dt = bundle.grid.dt();
  check_controls(u1, n, N, "backward solve (u1)");
  check_controls(u2, n, N, "backward solve (u2)");

  BSDESolution sol;
  sol.grid = bundle.grid;
  sol.n_paths = n;
  sol.dim_y = dim_y;
  sol.dim_w = d;
  sol.order = K;
  sol.y.assign(static_cast<size_t>(n) * (N + 1) * dim_y, 0.0);
  sol.q.assign(static_cast<size_t>(n) * N * dim_y * d, 0.0);
  sol.z.assign(static_cast<size_t>(n) * N * dim_y * K, 0.0);

  Eigen::VectorXd xi(dim_y);
  for (int p = 0; p < n; ++p) {
    terminal(PathView(levels, p), xi);
    if (xi.size() != dim_y) throw ConfigError("backward solve: terminal dimension mismatch");
    for (int c = 0; c < dim_y; ++c) {
      sol.y[(static_cast<size_t>(p) * (N + 1) + N) * dim_y + c] = xi[c];
    }
  }

  PolynomialBasis basis =
      PolynomialBasis::total_degree(levels.n_variables(), opts.regression.degree);
  bool warned_rank = false;

  Eigen::MatrixXd ynext(n, dim_y);
  Eigen::MatrixXd mart_resp(n, static_cast<Eigen::Index>(dim_y) * (d + K));
  Eigen::VectorXd ycur(dim_y), fval(dim_y), uu1(std::max(u1.dim, 0)), uu2(std::max(u2.dim, 0));
  Eigen::MatrixXd qp(dim_y, d), zp(dim_y, K);

  for (int k = N - 1; k >= 0; --k) {
    for (int p = 0; p < n; ++p) {
      for (int c = 0; c < dim_y; ++c) {
        ynext(p, c) = sol.y[(static_cast<size_t>(p) * (N + 1) + k + 1) * dim_y + c];
      }
    }

    DesignSolver solver(basis.evaluate(levels.variables_at(k)), opts.regression.ridge);
    Eigen::MatrixXd yhat = solver.project(ynext);

    for (int p = 0; p < n; ++p) {
      for (int c = 0; c < dim_y; ++c) {
        const double dev = ynext(p, c) - yhat(p, c);
        for (int i = 0; i < d; ++i) {
          mart_resp(p, static_cast<Eigen::Index>(i) * dim_y + c) = dev * bundle.dw(p, k, i) / dt;
        }
        for (int i = 1; i <= K; ++i) {
          mart_resp(p, static_cast<Eigen::Index>(d + i - 1) * dim_y + c) =
              dev * incs.value(p, k, i) / dt;
        }
      }
    }
    Eigen::MatrixXd mart_fit = solver.project(mart_resp);
    if (solver.ridge_bumped() && !warned_rank) {
      warn("backward solve: rank-deficient regression design; ridge bump applied");
      warned_rank = true;
    }

    const double t = bundle.grid.time(k);
    double worst = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int c = 0; c < dim_y; ++c) {
        for (int i = 0; i < d; ++i) {
          qp(c, i) = mart_fit(p, static_cast<Eigen::Index>(i) * dim_y + c);
        }
        for (int i = 0; i < K; ++i) {
          zp(c, i) = mart_fit(p, static_cast<Eigen::Index>(d + i) * dim_y + c);
        }
      }
      ycur = yhat.row(p).transpose();
      u1.get(p, k, uu1);
      u2.get(p, k, uu2);
      driver(t, ycur, qp, zp, uu1, uu2, fval);
      if (fval.size() != dim_y) throw ConfigError("backward solve: driver dimension mismatch");
      for (int c = 0; c < dim_y; ++c) {
        const double v = ycur[c] + fval[c] * dt;
        sol.y[(static_cast<size_t>(p) * (N + 1) + k) * dim_y + c] = v;
        worst = std::max(worst, std::abs(v));
        for (int i = 0; i < d; ++i) {
          sol.q[((static_cast<size_t>(p) * N + k) * dim_y + c) * d + i] = qp(c, i);
        }
        for (int i = 0; i < K; ++i) {
          sol.z[((static_cast<size_t>(p) * N + k) * dim_y + c) * K + i] = zp(c, i);
        }
      }
    }
    if (!(worst < opts.divergence_guard)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "backward solve diverged at step %d (|y| ~ %.3g)", k, worst);
      throw NumericError(buf);
    }
  }
  return sol;
}

Eigen::VectorXd pathwise_cost(const BSDESolution& sol, const CostSpec& cost,
                              const ControlProcess& u1, const ControlProcess& u2) {
  if (!cost.running || !cost.initial) throw ConfigError("pathwise_cost: cost callbacks missing");
  const int n = sol.n_paths;
  const int N = sol.grid.steps;
  const double dt = sol.grid.dt();
  check_controls(u1, n, N, "pathwise_cost (u1)");
  check_controls(u2, n, N, "pathwise_cost (u2)");

  Eigen::VectorXd y(sol.dim_y), uu1(std::max(u1.dim, 0)), uu2(std::max(u2.dim, 0));
  Eigen::MatrixXd q(sol.dim_y, sol.dim_w), z(sol.dim_y, sol.order);
  Eigen::VectorXd out(n);
  for (int p = 0; p < n; ++p) {
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
      for (int c = 0; c < sol.dim_y; ++c) {
        y[c] = sol.y_at(p, k, c);
        for (int i = 0; i < sol.dim_w; ++i) q(c, i) = sol.q_at(p, k, c, i);
        for (int i = 1; i <= sol.order; ++i) z(c, i - 1) = sol.z_at(p, k, c, i);
      }
      u1.get(p, k, uu1);
      u2.get(p, k, uu2);
      acc += cost.running(sol.grid.time(k), y, q, z, uu1, uu2) * dt;
    }
    for (int c = 0; c < sol.dim_y; ++c) y[c] = sol.y_at(p, 0, c);
    acc += cost.initial(y);
    out[p] = acc;
  }
  return out;
}

CostEstimate evaluate_cost(const BSDESolution& sol, const CostSpec& cost,
                           const ControlProcess& u1, const ControlProcess& u2) {
  const Eigen::VectorXd j = pathwise_cost(sol, cost, u1, u2);
  CostEstimate est;
  est.value = j.mean();
  const double var = (j.array() - est.value).square().sum() / static_cast<double>(j.size());
  est.se = std::sqrt(var / static_cast<double>(j.size()));
  return est;
}

ResidualReport residual_audit(const BSDESolution& sol, const PathBundle& bundle,
                              const TeugelIncrements& incs, const DriverFn& driver,
                              const ControlProcess& u1, const ControlProcess& u2) {
  const int n = sol.n_paths;
  const int N = sol.grid.steps;
  const double dt = sol.grid.dt();
  if (bundle.n_paths != n || incs.n_paths != n || incs.steps != N) {
    throw ConfigError("residual_audit: shape mismatch");
  }
  ResidualReport rep;
  rep.step_mean.assign(N, 0.0);
  Eigen::VectorXd y(sol.dim_y), fval(sol.dim_y), uu1(std::max(u1.dim, 0)),
      uu2(std::max(u2.dim, 0));
  Eigen::MatrixXd q(sol.dim_y, sol.dim_w), z(sol.dim_y, sol.order);
  Eigen::VectorXd mean(sol.dim_y);
  double sq = 0.0;
  size_t count = 0;
  for (int k = 0; k < N; ++k) {
    mean.setZero();
    for (int p = 0; p < n; ++p) {
      for (int c = 0; c < sol.dim_y; ++c) {
        y[c] = sol.y_at(p, k, c);
        for (int i = 0; i < sol.dim_w; ++i) q(c, i) = sol.q_at(p, k, c, i);
        for (int i = 1; i <= sol.order; ++i) z(c, i - 1) = sol.z_at(p, k, c, i);
      }
      u1.get(p, k, uu1);
      u2.get(p, k, uu2);
      driver(sol.grid.time(k), y, q, z, uu1, uu2, fval);
      for (int c = 0; c < sol.dim_y; ++c) {
        double r = sol.y_at(p, k + 1, c) - y[c] + fval[c] * dt;
        for (int i = 0; i < sol.dim_w; ++i) r -= q(c, i) * bundle.dw(p, k, i);
        for (int i = 1; i <= sol.order; ++i) r -= z(c, i - 1) * incs.value(p, k, i);
        mean[c] += r;
        sq += r * r;
        ++count;
      }
    }
    rep.step_mean[k] = (mean / static_cast<double>(n)).cwiseAbs().maxCoeff();
    rep.max_step_mean = std::max(rep.max_step_mean, rep.step_mean[k]);
  }
  rep.rms = std::sqrt(sq / static_cast<double>(count));
  return rep;
}

}  // namespace bsgame
