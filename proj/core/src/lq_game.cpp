#include "bsgame/lq_game.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bsgame/common.hpp"

namespace bsgame {

TimeVarying TimeVarying::constant(Eigen::MatrixXd v) {
  TimeVarying tv;
  tv.values.push_back(std::move(v));
  return tv;
}

const Eigen::MatrixXd& TimeVarying::at(double t) const {
  if (values.empty()) throw ConfigError("time-varying matrix: no pieces");
  const size_t idx = std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin();
  return values[std::min(idx, values.size() - 1)];
}

bool TimeVarying::fixed_shape(Eigen::Index rows, Eigen::Index cols) const {
  if (values.empty()) return false;
  if (values.size() != breaks.size() + 1) return false;
  if (!std::is_sorted(breaks.begin(), breaks.end())) return false;
  for (const auto& v : values) {
    if (v.rows() != rows || v.cols() != cols) return false;
  }
  return true;
}

namespace {

void check_shape(std::vector<FieldError>& errs, const TimeVarying& tv, Eigen::Index rows,
                 Eigen::Index cols, const std::string& path) {
  if (!tv.fixed_shape(rows, cols)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "expected %lld x %lld piecewise-constant matrix",
                  static_cast<long long>(rows), static_cast<long long>(cols));
    errs.push_back({path, buf});
  }
}

void check_spd(std::vector<FieldError>& errs, const TimeVarying& tv, const std::string& path) {
  for (const auto& v : tv.values) {
    if (v.rows() != v.cols()) return;  // shape error already recorded
    const double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * (1.0 + v.cwiseAbs().maxCoeff())) {
      errs.push_back({path, "control cost matrix must be symmetric"});
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-12) {
      errs.push_back({path, "control cost matrix must be positive definite"});
      return;
    }
  }
}

bool spd_everywhere(const TimeVarying& tv) {
  for (const auto& v : tv.values) {
    if (v.rows() != v.cols()) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-12) return false;
  }
  return true;
}

std::string indexed(const char* base, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[%d]", base, i);
  return buf;
}

Eigen::MatrixXd controls_at_step(const ControlProcess& u, int step) {
  Eigen::MatrixXd out(u.n_paths, u.dim);
  for (int p = 0; p < u.n_paths; ++p) {
    const double* row = u.at(p, step);
    for (int c = 0; c < u.dim; ++c) out(p, c) = row[c];
  }
  return out;
}

// 0.5 * D * N^{-1} with N symmetric positive definite; rows of E[k|info]
// times this give the pointwise optimizer.
Eigen::MatrixXd half_gain(const Eigen::MatrixXd& D, const Eigen::MatrixXd& N) {
  return 0.5 * Eigen::MatrixXd(N.ldlt().solve(D.transpose())).transpose();
}

bool same_info(const InfoStructure& a, const InfoStructure& b) {
  return a.kind == b.kind && a.delay == b.delay;
}

}  // namespace

void validate_lq(const LQSpec& spec) {
  std::vector<FieldError> errs;
  if (spec.n < 1) errs.push_back({"problem.n", "state dimension must be >= 1"});
  if (spec.d < 1) errs.push_back({"problem.d", "Brownian dimension must be >= 1"});
  if (spec.m1 < 1) errs.push_back({"problem.m1", "control dimension must be >= 1"});
  if (spec.m2 < 1) errs.push_back({"problem.m2", "control dimension must be >= 1"});
  if (spec.order < 1) errs.push_back({"problem.order", "martingale order must be >= 1"});
  if (!errs.empty()) throw ConfigError("invalid game dimensions", std::move(errs));

  check_shape(errs, spec.A, spec.n, spec.n, "problem.A");
  if (static_cast<int>(spec.B.size()) != spec.d) {
    errs.push_back({"problem.B", "need one matrix per Brownian component"});
  } else {
    for (int i = 0; i < spec.d; ++i) check_shape(errs, spec.B[i], spec.n, spec.n, indexed("problem.B", i));
  }
  if (static_cast<int>(spec.C.size()) != spec.order) {
    errs.push_back({"problem.C", "need one matrix per martingale"});
  } else {
    for (int i = 0; i < spec.order; ++i) check_shape(errs, spec.C[i], spec.n, spec.n, indexed("problem.C", i));
  }
  check_shape(errs, spec.D1, spec.n, spec.m1, "problem.D1");
  check_shape(errs, spec.D2, spec.n, spec.m2, "problem.D2");
  check_shape(errs, spec.E, spec.n, 1, "problem.E");
  if (static_cast<int>(spec.F.size()) != spec.d) {
    errs.push_back({"problem.F", "need one vector per Brownian component"});
  } else {
    for (int i = 0; i < spec.d; ++i) check_shape(errs, spec.F[i], spec.n, 1, indexed("problem.F", i));
  }
  if (static_cast<int>(spec.G.size()) != spec.order) {
    errs.push_back({"problem.G", "need one vector per martingale"});
  } else {
    for (int i = 0; i < spec.order; ++i) check_shape(errs, spec.G[i], spec.n, 1, indexed("problem.G", i));
  }
  if (spec.M.size() != spec.n) errs.push_back({"problem.M", "length must equal the state dimension"});
  check_shape(errs, spec.N1, spec.m1, spec.m1, "problem.N1");
  check_shape(errs, spec.N2, spec.m2, spec.m2, "problem.N2");
  if (errs.empty()) {
    check_spd(errs, spec.N1, "problem.N1");
    check_spd(errs, spec.N2, "problem.N2");
  }
  if (!errs.empty()) throw ConfigError("invalid game specification", std::move(errs));
}

DriverFn make_lq_driver(const LQSpec& spec) {
  return [spec](double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                const Eigen::MatrixXd& z, const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                Eigen::VectorXd& out) {
    out.noalias() = spec.A.at(t) * y;
    for (int i = 0; i < spec.d; ++i) out.noalias() += spec.B[i].at(t) * q.col(i);
    for (int i = 0; i < spec.order; ++i) out.noalias() += spec.C[i].at(t) * z.col(i);
    if (u1.size() > 0) out.noalias() += spec.D1.at(t) * u1;
    if (u2.size() > 0) out.noalias() += spec.D2.at(t) * u2;
  };
}

CostSpec make_lq_cost(const LQSpec& spec) {
  CostSpec cost;
  cost.running = [spec](double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                        const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                        const Eigen::VectorXd& u2) {
    double v = spec.E.at(t).col(0).dot(y);
    for (int i = 0; i < spec.d; ++i) v += spec.F[i].at(t).col(0).dot(q.col(i));
    for (int i = 0; i < spec.order; ++i) v += spec.G[i].at(t).col(0).dot(z.col(i));
    if (u1.size() > 0) v += u1.dot(spec.N1.at(t) * u1);
    if (u2.size() > 0) v -= u2.dot(spec.N2.at(t) * u2);
    return v;
  };
  cost.initial = [spec](const Eigen::VectorXd& y0) { return spec.M.dot(y0); };
  return cost;
}

HamiltonianSpec make_lq_hamiltonian(const LQSpec& spec) {
  HamiltonianSpec ham;
  const DriverFn driver = make_lq_driver(spec);
  const CostSpec cost = make_lq_cost(spec);
  ham.value = [spec, driver, cost](double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& q,
                                   const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                                   const Eigen::VectorXd& u2, const Eigen::VectorXd& k) {
    Eigen::VectorXd f(k.size());
    driver(t, y, q, z, u1, u2, f);
    return -k.dot(f) + cost.running(t, y, q, z, u1, u2);
  };
  ham.gradients = [spec](double t, const Eigen::VectorXd&, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& z, const Eigen::VectorXd& u1,
                         const Eigen::VectorXd& u2, const Eigen::VectorXd& k,
                         HamiltonianGradients& out) {
    out.dy.noalias() = -spec.A.at(t).transpose() * k;
    out.dy += spec.E.at(t).col(0);
    out.dq.resize(k.size(), spec.d);
    for (int i = 0; i < spec.d; ++i) {
      out.dq.col(i).noalias() = -spec.B[i].at(t).transpose() * k;
      out.dq.col(i) += spec.F[i].at(t).col(0);
    }
    out.dz.resize(k.size(), spec.order);
    for (int i = 0; i < spec.order; ++i) {
      out.dz.col(i).noalias() = -spec.C[i].at(t).transpose() * k;
      out.dz.col(i) += spec.G[i].at(t).col(0);
    }
    out.du1.noalias() = -spec.D1.at(t).transpose() * k;
    if (u1.size() > 0) out.du1.noalias() += 2.0 * (spec.N1.at(t) * u1);
    out.du2.noalias() = -spec.D2.at(t).transpose() * k;
    if (u2.size() > 0) out.du2.noalias() -= 2.0 * (spec.N2.at(t) * u2);
    (void)q;
    (void)z;
  };
  return ham;
}

std::pair<ControlProcess, ControlProcess> lq_optimal_controls(
    const LQSpec& spec, const AdjointSolution& adjoint, const InfoStructure& info1,
    const InfoStructure& info2, const NoiseLevels& levels, const RegressionConfig& cfg) {
  if (adjoint.dim_k != spec.n) throw ConfigError("optimal controls: adjoint dimension mismatch");
  if (adjoint.n_paths != levels.n_paths || adjoint.grid.steps != levels.grid.steps) {
    throw ConfigError("optimal controls: adjoint and noise levels disagree on shape");
  }
  const int N = levels.grid.steps;
  const int n_paths = levels.n_paths;
  ControlProcess u1 = ControlProcess::zeros(n_paths, N, spec.m1);
  ControlProcess u2 = ControlProcess::zeros(n_paths, N, spec.m2);
  const bool share = same_info(info1, info2);
  for (int m = 0; m < N; ++m) {
    const double t = levels.grid.time(m);
    const Eigen::MatrixXd km = adjoint.at_gridpoint(m);
    const Eigen::MatrixXd khat1 = cond_exp_columns(km, info1, levels, m, cfg);
    const Eigen::MatrixXd khat2 = share ? khat1 : cond_exp_columns(km, info2, levels, m, cfg);
    const Eigen::MatrixXd un1 = khat1 * half_gain(spec.D1.at(t), spec.N1.at(t));
    const Eigen::MatrixXd un2 = -khat2 * half_gain(spec.D2.at(t), spec.N2.at(t));
    for (int p = 0; p < n_paths; ++p) {
      for (int c = 0; c < spec.m1; ++c) u1.at(p, m)[c] = un1(p, c);
      for (int c = 0; c < spec.m2; ++c) u2.at(p, m)[c] = un2(p, c);
    }
  }
  return {std::move(u1), std::move(u2)};
}

LQSolveResult lq_solve(const LQSpec& spec, const TerminalFn& xi, const NoiseLevels& levels,
                       const PathBundle& bundle, const TeugelIncrements& incs,
                       const LQSolveOptions& opts) {
  validate_lq(spec);
  if (bundle.dim_w != spec.d) {
    throw ConfigError("lq_solve: bundle Brownian dimension does not match the game");
  }
  if (incs.order != spec.order) {
    throw ConfigError("lq_solve: martingale order does not match the game");
  }
  LQSolveResult res;
  // The control and state gradients of this Hamiltonian are state-free, so
  // the adjoint can be advanced before any control or state is known.
  res.adjoint = solve_adjoint_forward(make_lq_hamiltonian(spec), Eigen::VectorXd(-spec.M),
                                      bundle, incs);
  auto controls = lq_optimal_controls(spec, res.adjoint, opts.info1, opts.info2, levels,
                                      opts.backward.regression);
  res.u1 = std::move(controls.first);
  res.u2 = std::move(controls.second);
  res.bsde = solve_backward(levels, bundle, incs, spec.n, make_lq_driver(spec), xi, res.u1,
                            res.u2, opts.backward);
  res.cost = evaluate_cost(res.bsde, make_lq_cost(spec), res.u1, res.u2);
  return res;
}

StationarityReport verify_stationarity(const LQSpec& spec, const AdjointSolution& adjoint,
                                       const ControlProcess& u1, const ControlProcess& u2,
                                       const InfoStructure& info1, const InfoStructure& info2,
                                       const NoiseLevels& levels, const RegressionConfig& cfg) {
  const int N = levels.grid.steps;
  const int n_paths = levels.n_paths;
  if (adjoint.n_paths != n_paths || adjoint.grid.steps != N) {
    throw ConfigError("verify_stationarity: adjoint shape mismatch");
  }
  if (u1.n_paths != n_paths || u1.steps != N || u2.n_paths != n_paths || u2.steps != N) {
    throw ConfigError("verify_stationarity: control shape mismatch");
  }
  StationarityReport rep;
  rep.player1.per_step.assign(N, 0.0);
  rep.player2.per_step.assign(N, 0.0);
  const double root_n = std::sqrt(static_cast<double>(n_paths));
  for (int m = 0; m < N; ++m) {
    const double t = levels.grid.time(m);
    const Eigen::MatrixXd km = adjoint.at_gridpoint(m);
    const Eigen::MatrixXd g1 =
        (-km * spec.D1.at(t)) + 2.0 * controls_at_step(u1, m) * spec.N1.at(t);
    const Eigen::MatrixXd g2 =
        (-km * spec.D2.at(t)) - 2.0 * controls_at_step(u2, m) * spec.N2.at(t);
    const Eigen::MatrixXd r1 = cond_exp_columns(g1, info1, levels, m, cfg);
    const Eigen::MatrixXd r2 = cond_exp_columns(g2, info2, levels, m, cfg);
    rep.player1.per_step[m] = r1.cwiseAbs().maxCoeff();
    rep.player2.per_step[m] = r2.cwiseAbs().maxCoeff();
    rep.player1.max_residual = std::max(rep.player1.max_residual, rep.player1.per_step[m]);
    rep.player2.max_residual = std::max(rep.player2.max_residual, rep.player2.per_step[m]);
    for (Eigen::Index c = 0; c < g1.cols(); ++c) {
      const double mu = g1.col(c).mean();
      const double sd = std::sqrt((g1.col(c).array() - mu).square().sum() / n_paths);
      rep.player1.max_se = std::max(rep.player1.max_se, sd / root_n);
    }
    for (Eigen::Index c = 0; c < g2.cols(); ++c) {
      const double mu = g2.col(c).mean();
      const double sd = std::sqrt((g2.col(c).array() - mu).square().sum() / n_paths);
      rep.player2.max_se = std::max(rep.player2.max_se, sd / root_n);
    }
  }
  return rep;
}

namespace {

struct ProbeDirection {
  std::string name;
  int player;
  ControlProcess v;
};

ControlProcess add_scaled(const ControlProcess& base, double eps, const ControlProcess& v) {
  ControlProcess out = base;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += eps * v.values[i];
  return out;
}

double quadratic_coefficient(const ControlProcess& v, const TimeVarying& ncost,
                             const TimeGrid& grid) {
  double total = 0.0;
  Eigen::VectorXd vv(v.dim);
  for (int p = 0; p < v.n_paths; ++p) {
    for (int k = 0; k < v.steps; ++k) {
      for (int c = 0; c < v.dim; ++c) vv[c] = v.at(p, k)[c];
      total += vv.dot(ncost.at(grid.time(k)) * vv) * grid.dt();
    }
  }
  return total / static_cast<double>(v.n_paths);
}

}  // namespace

SaddleReport verify_saddle(const LQSpec& spec, const TerminalFn& xi, const NoiseLevels& levels,
                           const PathBundle& bundle, const TeugelIncrements& incs,
                           const LQSolveResult& candidate, const LQSolveOptions& solve_opts,
                           const SaddleOptions& opts) {
  const int N = bundle.grid.steps;
  const int n_paths = bundle.n_paths;
  const CostSpec cost = make_lq_cost(spec);
  const DriverFn driver = make_lq_driver(spec);

  const Eigen::VectorXd base_j = pathwise_cost(candidate.bsde, cost, candidate.u1, candidate.u2);
  SaddleReport rep;
  rep.baseline_value = base_j.mean();
  rep.baseline_se = std::sqrt((base_j.array() - rep.baseline_value).square().sum() /
                              static_cast<double>(n_paths) / static_cast<double>(n_paths));

  std::vector<ProbeDirection> dirs;
  auto add_constant = [&](int player, int dim, int comp) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[comp] = 1.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "u%d[%d] constant", player, comp);
    dirs.push_back({buf, player, ControlProcess::constant(n_paths, N, e)});
  };
  auto add_sign_w = [&](int player, int dim, int comp) {
    ControlProcess v = ControlProcess::zeros(n_paths, N, dim);
    for (int p = 0; p < n_paths; ++p) {
      for (int k = 0; k < N; ++k) {
        const double w = levels.w_at(p, k, 0);
        v.at(p, k)[comp] = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
      }
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "u%d[%d] sign(W1)", player, comp);
    dirs.push_back({buf, player, std::move(v)});
  };
  for (int c = 0; c < spec.m1; ++c) {
    add_constant(1, spec.m1, c);
    if (opts.adapted_directions && solve_opts.info1.kind == InfoStructure::Kind::Full) {
      add_sign_w(1, spec.m1, c);
    }
  }
  for (int c = 0; c < spec.m2; ++c) {
    add_constant(2, spec.m2, c);
    if (opts.adapted_directions && solve_opts.info2.kind == InfoStructure::Kind::Full) {
      add_sign_w(2, spec.m2, c);
    }
  }

  for (const auto& dir : dirs) {
    const double qcoef =
        quadratic_coefficient(dir.v, dir.player == 1 ? spec.N1 : spec.N2, bundle.grid);
    for (double eps : opts.epsilons) {
      const ControlProcess& u1 =
          dir.player == 1 ? add_scaled(candidate.u1, eps, dir.v) : candidate.u1;
      const ControlProcess& u2 =
          dir.player == 2 ? add_scaled(candidate.u2, eps, dir.v) : candidate.u2;
      BSDESolution sol =
          solve_backward(levels, bundle, incs, spec.n, driver, xi, u1, u2, solve_opts.backward);
      const Eigen::VectorXd dj = pathwise_cost(sol, cost, u1, u2) - base_j;
      SaddleProbe probe;
      probe.direction = dir.name;
      probe.player = dir.player;
      probe.epsilon = eps;
      probe.delta_j = dj.mean();
      probe.se = std::sqrt((dj.array() - probe.delta_j).square().sum() /
                           static_cast<double>(n_paths) / static_cast<double>(n_paths));
      const double denom = (dir.player == 1 ? 1.0 : -1.0) * eps * eps * qcoef;
      probe.quad_ratio = denom != 0.0 ? probe.delta_j / denom : 0.0;
      probe.sign_ok = dir.player == 1 ? probe.delta_j >= -3.0 * probe.se
                                      : probe.delta_j <= 3.0 * probe.se;
      probe.ratio_ok = denom != 0.0 && std::abs(probe.quad_ratio - 1.0) <= opts.ratio_tol;
      rep.signs_ok = rep.signs_ok && probe.sign_ok;
      rep.ratios_ok = rep.ratios_ok && probe.ratio_ok;
      rep.probes.push_back(std::move(probe));
    }
  }
  return rep;
}

MinimaxReport verify_minimax(const LQSpec& spec, const AdjointSolution& adjoint,
                             const ControlProcess& u1, const ControlProcess& u2,
                             const InfoStructure& info1, const InfoStructure& info2,
                             const NoiseLevels& levels, const RegressionConfig& cfg,
                             const MinimaxOptions& opts) {
  const int N = levels.grid.steps;
  const int n_paths = levels.n_paths;
  if (u1.steps != N || u2.steps != N || u1.n_paths != n_paths || u2.n_paths != n_paths) {
    throw ConfigError("verify_minimax: control shape mismatch");
  }
  MinimaxReport rep;
  const bool definite = spd_everywhere(spec.N1) && spd_everywhere(spec.N2);
  bool run_grid = opts.grid;
  if (!definite) {
    warn("verify_minimax: control cost not positive definite; closed form skipped, grid scan only");
    rep.note = "indefinite control cost: closed form unavailable, grid scan only";
    run_grid = true;
  } else {
    rep.note = "closed-form pointwise optimizer compared against the candidate";
  }

  std::vector<double> offsets;
  if (run_grid) {
    const int gp = std::max(opts.grid_points, 3);
    for (int i = 0; i < gp; ++i) {
      const double off = -opts.grid_radius + 2.0 * opts.grid_radius * i / (gp - 1);
      if (off != 0.0) offsets.push_back(off);
    }
  }

  const bool share = same_info(info1, info2);
  Eigen::VectorXd ucand, uprobe;
  for (int m = 0; m < N; ++m) {
    const double t = levels.grid.time(m);
    const Eigen::MatrixXd km = adjoint.at_gridpoint(m);
    const Eigen::MatrixXd khat1 = cond_exp_columns(km, info1, levels, m, cfg);
    const Eigen::MatrixXd khat2 = share ? khat1 : cond_exp_columns(km, info2, levels, m, cfg);
    const Eigen::MatrixXd& n1 = spec.N1.at(t);
    const Eigen::MatrixXd& n2 = spec.N2.at(t);
    if (definite) {
      const Eigen::MatrixXd best1 = khat1 * half_gain(spec.D1.at(t), n1);
      const Eigen::MatrixXd best2 = -khat2 * half_gain(spec.D2.at(t), n2);
      const Eigen::MatrixXd cu1 = controls_at_step(u1, m);
      const Eigen::MatrixXd cu2 = controls_at_step(u2, m);
      rep.max_dev_u1 = std::max(rep.max_dev_u1, (best1 - cu1).cwiseAbs().maxCoeff());
      rep.max_dev_u2 = std::max(rep.max_dev_u2, (best2 - cu2).cwiseAbs().maxCoeff());
    }
    if (run_grid) {
      const Eigen::MatrixXd lin1 = khat1 * spec.D1.at(t);  // row p = khat_p' D1
      const Eigen::MatrixXd lin2 = khat2 * spec.D2.at(t);
      for (int p = 0; p < n_paths; p += std::max(opts.path_stride, 1)) {
        ucand.resize(spec.m1);
        for (int c = 0; c < spec.m1; ++c) ucand[c] = u1.at(p, m)[c];
        const double base1 = ucand.dot(n1 * ucand) - lin1.row(p).dot(ucand);
        for (int c = 0; c < spec.m1; ++c) {
          for (double off : offsets) {
            uprobe = ucand;
            uprobe[c] += off;
            const double val = uprobe.dot(n1 * uprobe) - lin1.row(p).dot(uprobe);
            rep.worst_grid_violation = std::max(rep.worst_grid_violation, base1 - val);
          }
        }
        ucand.resize(spec.m2);
        for (int c = 0; c < spec.m2; ++c) ucand[c] = u2.at(p, m)[c];
        const double base2 = -ucand.dot(n2 * ucand) - lin2.row(p).dot(ucand);
        for (int c = 0; c < spec.m2; ++c) {
          for (double off : offsets) {
            uprobe = ucand;
            uprobe[c] += off;
            const double val = -uprobe.dot(n2 * uprobe) - lin2.row(p).dot(uprobe);
            rep.worst_grid_violation = std::max(rep.worst_grid_violation, val - base2);
          }
        }
      }
    }
  }
  rep.analytic_ok = definite && rep.max_dev_u1 <= opts.tol && rep.max_dev_u2 <= opts.tol;
  rep.grid_ok = !run_grid || rep.worst_grid_violation <= opts.tol;
  return rep;
}

}  // namespace bsgame
