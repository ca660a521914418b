#include "bsgame/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bsgame/bsde_solver.hpp"
#include "bsgame/common.hpp"
#include "bsgame/lq_game.hpp"

namespace bsgame {

// build_pipeline with progress labels, so a failed run's manifest can say
// which stage died. Defined below; the label-free overload wraps it.
Pipeline build_pipeline_staged(const ProblemConfig& cfg, bool with_paths, std::string& stage);

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  explicit CsvFile(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open output file: " + path.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

struct RunState {
  fs::path dir;
  json manifest;
  std::vector<std::string> files;
  bool write_csv = true;
  bool write_json = true;

  void add_json(const char* name, const json& doc) {
    if (!write_json) return;
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError(std::string("cannot open output file: ") + name);
    out << doc.dump(2) << '\n';
    files.push_back(name);
  }

  void emit_manifest() {
    manifest["files"] = files;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
  }
};

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- shared artifact writers ----------------------------------------------

void append_mean_sd(std::vector<std::string>& cells, const ControlProcess& u, int step) {
  for (int c = 0; c < u.dim; ++c) {
    double mean = 0.0;
    for (int p = 0; p < u.n_paths; ++p) mean += u.at(p, step)[c];
    mean /= u.n_paths;
    double ss = 0.0;
    for (int p = 0; p < u.n_paths; ++p) {
      const double d = u.at(p, step)[c] - mean;
      ss += d * d;
    }
    const double sd = u.n_paths > 1 ? std::sqrt(ss / (u.n_paths - 1)) : 0.0;
    cells.push_back(fmt(mean));
    cells.push_back(fmt(sd));
  }
}

void write_controls_csv(RunState& rs, const TimeGrid& grid, const ControlProcess& u1,
                        const ControlProcess& u2) {
  CsvFile csv(rs.dir / "controls.csv");
  std::vector<std::string> cells{"t"};
  for (int c = 1; c <= u1.dim; ++c) {
    cells.push_back("u1_mean_" + std::to_string(c));
    cells.push_back("u1_sd_" + std::to_string(c));
  }
  for (int c = 1; c <= u2.dim; ++c) {
    cells.push_back("u2_mean_" + std::to_string(c));
    cells.push_back("u2_sd_" + std::to_string(c));
  }
  csv.row(cells);
  for (int k = 0; k < grid.steps; ++k) {
    cells.clear();
    cells.push_back(fmt(grid.time(k)));
    append_mean_sd(cells, u1, k);
    append_mean_sd(cells, u2, k);
    csv.row(cells);
  }
  rs.files.push_back("controls.csv");
}

void write_adjoint_csv(RunState& rs, const AdjointSolution& adj) {
  CsvFile csv(rs.dir / "adjoint.csv");
  std::vector<std::string> cells{"t"};
  for (int c = 1; c <= adj.dim_k; ++c) {
    cells.push_back("k_mean_" + std::to_string(c));
    cells.push_back("k_se_" + std::to_string(c));
  }
  csv.row(cells);
  Eigen::VectorXd mean, se;
  for (int g = 0; g <= adj.grid.steps; ++g) {
    adj.mean_se(g, mean, se);
    cells.clear();
    cells.push_back(fmt(adj.grid.time(g)));
    for (int c = 0; c < adj.dim_k; ++c) {
      cells.push_back(fmt(mean[c]));
      cells.push_back(fmt(se[c]));
    }
    csv.row(cells);
  }
  rs.files.push_back("adjoint.csv");
}

bool stationarity_ok(const PlayerStationarity& ps) {
  return ps.max_residual <= std::max(1e-8, 3.0 * ps.max_se);
}

json stationarity_json(const StationarityReport& st) {
  auto player = [](const PlayerStationarity& ps) {
    return json{{"max_residual", ps.max_residual},
                {"max_se", ps.max_se},
                {"ok", stationarity_ok(ps)},
                {"per_step", ps.per_step}};
  };
  json j;
  j["player1"] = player(st.player1);
  j["player2"] = player(st.player2);
  j["ok"] = stationarity_ok(st.player1) && stationarity_ok(st.player2);
  return j;
}

json saddle_json(const SaddleReport& sr) {
  json probes = json::array();
  for (const auto& p : sr.probes) {
    probes.push_back({{"direction", p.direction},
                      {"player", p.player},
                      {"epsilon", p.epsilon},
                      {"delta_j", p.delta_j},
                      {"se", p.se},
                      {"quad_ratio", p.quad_ratio},
                      {"sign_ok", p.sign_ok},
                      {"ratio_ok", p.ratio_ok}});
  }
  return json{{"baseline_value", sr.baseline_value},
              {"baseline_se", sr.baseline_se},
              {"signs_ok", sr.signs_ok},
              {"ratios_ok", sr.ratios_ok},
              {"ok", sr.signs_ok && sr.ratios_ok},
              {"probes", std::move(probes)}};
}

bool tv_is_zero(const TimeVarying& tv) {
  for (const auto& v : tv.values) {
    if (v.size() > 0 && v.cwiseAbs().maxCoeff() > 0.0) return false;
  }
  return true;
}

// Drops martingale coefficients the basis cannot carry; nonzero ones there
// would silently change the problem, so they are an error instead.
LQSpec truncate_spec(const LQSpec& in, int order_used) {
  LQSpec spec = in;
  if (order_used >= in.order) return spec;
  std::vector<FieldError> errs;
  for (int i = order_used; i < in.order; ++i) {
    if (i < static_cast<int>(in.C.size()) && !tv_is_zero(in.C[i])) {
      errs.push_back({"problem.C[" + std::to_string(i) + "]",
                      "nonzero coefficient beyond the usable martingale order"});
    }
    if (i < static_cast<int>(in.G.size()) && !tv_is_zero(in.G[i])) {
      errs.push_back({"problem.G[" + std::to_string(i) + "]",
                      "nonzero coefficient beyond the usable martingale order"});
    }
  }
  if (!errs.empty()) {
    throw ConfigError("martingale order was truncated below the problem's coefficients",
                      std::move(errs));
  }
  spec.order = order_used;
  spec.C.resize(order_used);
  spec.G.resize(order_used);
  return spec;
}

// --- commands ---------------------------------------------------------------

int run_orthonormalize(const ProblemConfig& cfg, RunState& rs, std::string& stage) {
  Pipeline p = build_pipeline_staged(cfg, false, stage);
  rs.manifest["order_used"] = p.order_used;
  const Eigen::MatrixXd gram_used = p.gram.topLeftCorner(p.order_used, p.order_used);
  const double residual = p.basis.residual(gram_used);

  stage = "outputs";
  if (rs.write_csv) {
    {
      CsvFile csv(rs.dir / "gram.csv");
      std::vector<std::string> cells{"i"};
      for (int j = 1; j <= cfg.order; ++j) cells.push_back("g_" + std::to_string(j));
      csv.row(cells);
      for (int i = 0; i < cfg.order; ++i) {
        cells.clear();
        cells.push_back(std::to_string(i + 1));
        for (int j = 0; j < cfg.order; ++j) cells.push_back(fmt(p.gram(i, j)));
        csv.row(cells);
      }
      rs.files.push_back("gram.csv");
    }
    CsvFile csv(rs.dir / "basis.csv");
    std::vector<std::string> cells{"i"};
    for (int j = 1; j <= p.order_used; ++j) cells.push_back("c_" + std::to_string(j));
    csv.row(cells);
    for (int i = 0; i < p.order_used; ++i) {
      cells.clear();
      cells.push_back(std::to_string(i + 1));
      for (int j = 0; j < p.order_used; ++j) cells.push_back(fmt(p.basis.coeff(i, j)));
      csv.row(cells);
    }
    rs.files.push_back("basis.csv");
  }
  rs.manifest["results"] = {{"residual", residual}};
  return 0;
}

int run_simulate(const ProblemConfig& cfg, RunState& rs, std::string& stage) {
  Pipeline p = build_pipeline_staged(cfg, true, stage);
  rs.manifest["order_used"] = p.order_used;

  stage = "bracket";
  const BracketReport br = bracket_test(p.incs, p.bundle.grid);
  double max_dev_se = 0.0;
  for (int i = 0; i < p.order_used; ++i) {
    for (int j = 0; j < p.order_used; ++j) {
      const double target = (i == j) ? cfg.horizon : 0.0;
      const double dev = std::abs(br.estimate(i, j) - target);
      const double se = br.se(i, j);
      max_dev_se = std::max(max_dev_se, se > 0.0 ? dev / se : (dev > 0.0 ? 1e300 : 0.0));
    }
  }

  stage = "outputs";
  if (rs.write_csv) {
    {
      CsvFile csv(rs.dir / "bracket.csv");
      csv.row({"i", "j", "estimate", "se", "target"});
      for (int i = 0; i < p.order_used; ++i) {
        for (int j = 0; j < p.order_used; ++j) {
          const double target = (i == j) ? cfg.horizon : 0.0;
          csv.row({std::to_string(i + 1), std::to_string(j + 1), fmt(br.estimate(i, j)),
                   fmt(br.se(i, j)), fmt(target)});
        }
      }
      rs.files.push_back("bracket.csv");
    }
    std::vector<CumulativeMeanReport> reports;
    for (int j = 1; j <= p.order_used; ++j) reports.push_back(empirical_mean_Y(p.bundle, j));
    CsvFile csv(rs.dir / "mean_y.csv");
    std::vector<std::string> cells{"t"};
    for (int j = 1; j <= p.order_used; ++j) {
      cells.push_back("mean_y" + std::to_string(j));
      cells.push_back("se_y" + std::to_string(j));
    }
    csv.row(cells);
    for (int g = 0; g <= cfg.steps; ++g) {
      cells.clear();
      cells.push_back(fmt(reports[0].time[g]));
      for (const auto& r : reports) {
        cells.push_back(fmt(r.mean[g]));
        cells.push_back(fmt(r.se[g]));
      }
      csv.row(cells);
    }
    rs.files.push_back("mean_y.csv");
  }
  rs.manifest["results"] = {{"max_bracket_dev_se", max_dev_se},
                            {"bracket_within_3se", max_dev_se <= 3.0}};
  return 0;
}

int run_lq(const ProblemConfig& cfg, RunState& rs, std::string& stage, bool with_saddle) {
  stage = "problem";
  {
    std::vector<FieldError> errs;
    if (!cfg.has_problem) errs.push_back({"problem", "required by this command"});
    if (cfg.has_problem && !cfg.has_terminal)
      errs.push_back({"problem.xi", "required by this command"});
    if (!errs.empty()) throw ConfigError("configuration lacks a solvable problem", std::move(errs));
  }

  Pipeline p = build_pipeline_staged(cfg, true, stage);
  rs.manifest["order_used"] = p.order_used;

  stage = "problem";
  const LQSpec spec = truncate_spec(cfg.lq, p.order_used);
  const TerminalFn xi = make_terminal(cfg.terminal, cfg.n, cfg.d, p.order_used);
  LQSolveOptions sopts;
  sopts.backward.regression = cfg.regression;
  sopts.info1 = cfg.info1;
  sopts.info2 = cfg.info2;

  stage = "solve";
  const LQSolveResult res = lq_solve(spec, xi, p.levels, p.bundle, p.incs, sopts);

  stage = "stationarity";
  const StationarityReport st = verify_stationarity(spec, res.adjoint, res.u1, res.u2, cfg.info1,
                                                    cfg.info2, p.levels, cfg.regression);
  bool ok = stationarity_ok(st.player1) && stationarity_ok(st.player2);

  json results;
  results["J"] = res.cost.value;
  results["J_se"] = res.cost.se;
  const Eigen::VectorXd y0 = res.bsde.y0_mean();
  results["y0_mean"] = std::vector<double>(y0.data(), y0.data() + y0.size());
  results["stationarity_max_p1"] = st.player1.max_residual;
  results["stationarity_max_p2"] = st.player2.max_residual;
  results["stationarity_ok"] = ok;

  SaddleReport sr;
  if (with_saddle) {
    stage = "saddle";
    sr = verify_saddle(spec, xi, p.levels, p.bundle, p.incs, res, sopts, SaddleOptions{});
    results["saddle_ok"] = sr.all_ok();
    ok = ok && sr.all_ok();
  }

  stage = "outputs";
  if (rs.write_csv) {
    write_controls_csv(rs, p.bundle.grid, res.u1, res.u2);
    write_adjoint_csv(rs, res.adjoint);
  }
  rs.add_json("stationarity.json", stationarity_json(st));
  if (with_saddle) rs.add_json("saddle.json", saddle_json(sr));
  rs.manifest["results"] = results;
  return ok ? 0 : 4;
}

int run_convergence(const ProblemConfig& cfg, RunState& rs, std::string& stage) {
  Pipeline p = build_pipeline_staged(cfg, true, stage);
  rs.manifest["order_used"] = p.order_used;

  // Linear-driver oracle with a known closed form: f = r y, xi = c gives
  // y(t) = c exp(r (T - t)); the solver must track it at first order in dt.
  stage = "solve";
  const double r = 0.5;
  const double c = 1.0;
  DriverFn driver = [r](double, const Eigen::VectorXd& y, const Eigen::MatrixXd&,
                        const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                        Eigen::VectorXd& out) { out = r * y; };
  TerminalFn xi = [c](const PathView&, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Constant(1, c);
  };
  BackwardOptions bopts;
  bopts.regression = cfg.regression;
  const ControlProcess u1 = ControlProcess::zeros(cfg.paths, cfg.steps, 0);
  const ControlProcess u2 = ControlProcess::zeros(cfg.paths, cfg.steps, 0);
  const BSDESolution sol = solve_backward(p.levels, p.bundle, p.incs, 1, driver, xi, u1, u2, bopts);

  stage = "oracle";
  double max_error = 0.0;
  std::vector<double> grid_mean(cfg.steps + 1), grid_ref(cfg.steps + 1), grid_err(cfg.steps + 1);
  for (int g = 0; g <= cfg.steps; ++g) {
    const double t = sol.grid.time(g);
    const double ref = c * std::exp(r * (cfg.horizon - t));
    double mean = 0.0, worst = 0.0;
    for (int path = 0; path < cfg.paths; ++path) {
      const double v = sol.y_at(path, g, 0);
      mean += v;
      worst = std::max(worst, std::abs(v - ref));
    }
    grid_mean[g] = mean / cfg.paths;
    grid_ref[g] = ref;
    grid_err[g] = worst;
    max_error = std::max(max_error, worst);
  }

  stage = "outputs";
  if (rs.write_csv) {
    CsvFile csv(rs.dir / "convergence.csv");
    csv.row({"t", "y_mean", "y_ref", "max_abs_err"});
    for (int g = 0; g <= cfg.steps; ++g) {
      csv.row({fmt(sol.grid.time(g)), fmt(grid_mean[g]), fmt(grid_ref[g]), fmt(grid_err[g])});
    }
    rs.files.push_back("convergence.csv");
  }
  rs.manifest["results"] = {{"max_error", max_error},
                            {"dt", p.bundle.grid.dt()},
                            {"rate_constant", r},
                            {"terminal_value", c}};
  return 0;
}

}  // namespace

Pipeline build_pipeline_staged(const ProblemConfig& cfg, bool with_paths, std::string& stage) {
  Pipeline p;
  stage = "orthonormalize";
  p.gram = gram_matrix(cfg.levy, cfg.order);
  p.order_used = effective_order(p.gram, 1e-12);
  if (p.order_used == 0) {
    throw ConfigError("driver is degenerate: no usable orthonormal martingale at order 1");
  }
  if (p.order_used < cfg.order) {
    warn("martingale basis truncated to order " + std::to_string(p.order_used) +
         " (requested " + std::to_string(cfg.order) + "): Gram matrix is rank deficient");
  }
  p.basis = orthonormalize(p.gram, p.order_used);
  if (!with_paths) return p;

  stage = "simulate";
  p.bundle = simulate(cfg.levy, cfg.grid(), cfg.d, p.order_used, cfg.paths, cfg.seed);
  stage = "increments";
  p.incs = increments(p.bundle, p.basis);
  stage = "levels";
  p.levels = accumulate_levels(p.bundle, p.incs);
  return p;
}

Pipeline build_pipeline(const ProblemConfig& cfg, bool with_paths) {
  std::string stage;
  return build_pipeline_staged(cfg, with_paths, stage);
}

int run_mode(const ProblemConfig& cfg, const std::string& mode, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RunState rs;
  rs.dir = opts.out_dir.empty() ? fs::path(cfg.outputs.directory) : fs::path(opts.out_dir);
  fs::create_directories(rs.dir);
  rs.write_csv = cfg.outputs.csv;
  rs.write_json = cfg.outputs.json;

  json& m = rs.manifest;
  m["mode"] = mode;
  m["config_hash"] = config_hash(cfg);
  m["base_hash"] = base_hash(cfg);
  m["seed"] = cfg.seed;
  m["paths"] = cfg.paths;
  m["steps"] = cfg.steps;
  m["horizon"] = cfg.horizon;
  m["order_requested"] = cfg.order;
  m["order_used"] = 0;
  m["status"] = "ok";

  std::string stage = "setup";
  int code = 0;
  try {
    if (mode == "orthonormalize") {
      code = run_orthonormalize(cfg, rs, stage);
    } else if (mode == "simulate") {
      code = run_simulate(cfg, rs, stage);
    } else if (mode == "solve-lq") {
      code = run_lq(cfg, rs, stage, false);
    } else if (mode == "verify-saddle") {
      code = run_lq(cfg, rs, stage, true);
    } else if (mode == "bsde-convergence") {
      code = run_convergence(cfg, rs, stage);
    } else {
      throw ConfigError("unknown command: " + mode);
    }
  } catch (const std::exception& e) {
    m["status"] = "error";
    m["failing_stage"] = stage;
    m["error"] = e.what();
    m["wall_seconds"] = elapsed_seconds(t0);
    rs.emit_manifest();
    throw;
  }
  if (code != 0) m["status"] = "verification_failed";
  m["wall_seconds"] = elapsed_seconds(t0);
  rs.emit_manifest();
  return code;
}

int write_report(const std::vector<std::string>& manifest_paths, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  if (manifest_paths.empty()) throw ConfigError("report requires at least one manifest");

  std::vector<json> ms;
  for (const auto& path : manifest_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    json doc;
    try {
      in >> doc;
    } catch (const json::parse_error& e) {
      throw ConfigError("manifest is not valid JSON: " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("base_hash")) {
      throw ConfigError("not a run manifest (missing base_hash): " + path);
    }
    ms.push_back(std::move(doc));
  }
  const std::string base = ms[0]["base_hash"].get<std::string>();
  for (std::size_t i = 1; i < ms.size(); ++i) {
    if (ms[i]["base_hash"].get<std::string>() != base) {
      throw ConfigError("manifests do not share a base configuration: " + manifest_paths[i]);
    }
  }

  fs::create_directories(out_dir);
  CsvFile csv(fs::path(out_dir) / "comparison.csv");
  csv.row({"manifest", "mode", "seed", "paths", "steps", "dt", "J", "J_se", "value_check",
           "max_error", "rate"});

  bool have_baseline = false;
  double j0 = 0.0, j0_se = 0.0;
  bool have_prev_err = false;
  double prev_err = 0.0;
  int prev_steps = 0;

  for (std::size_t i = 0; i < ms.size(); ++i) {
    const json& m = ms[i];
    const json results = m.value("results", json::object());
    const int steps = m.value("steps", 0);
    const double horizon = m.value("horizon", 0.0);

    std::vector<std::string> cells;
    cells.push_back(manifest_paths[i]);
    cells.push_back(m.value("mode", std::string()));
    cells.push_back(std::to_string(m.value("seed", 0ull)));
    cells.push_back(std::to_string(m.value("paths", 0)));
    cells.push_back(std::to_string(steps));
    cells.push_back(steps > 0 ? fmt(horizon / steps) : "");

    if (results.contains("J")) {
      const double j = results["J"].get<double>();
      const double se = results.value("J_se", 0.0);
      cells.push_back(fmt(j));
      cells.push_back(fmt(se));
      if (!have_baseline) {
        have_baseline = true;
        j0 = j;
        j0_se = se;
        cells.push_back("baseline");
      } else {
        const double band = 3.0 * std::sqrt(se * se + j0_se * j0_se);
        cells.push_back(std::abs(j - j0) <= band ? "consistent" : "inconsistent");
      }
    } else {
      cells.push_back("");
      cells.push_back("");
      cells.push_back("");
    }

    if (results.contains("max_error")) {
      const double err = results["max_error"].get<double>();
      cells.push_back(fmt(err));
      if (have_prev_err && steps > 0 && prev_steps > 0 && steps != prev_steps && err > 0.0 &&
          prev_err > 0.0) {
        cells.push_back(fmt(std::log(prev_err / err) /
                            std::log(static_cast<double>(steps) / prev_steps)));
      } else {
        cells.push_back("");
      }
      have_prev_err = true;
      prev_err = err;
      prev_steps = steps;
    } else {
      cells.push_back("");
      cells.push_back("");
    }
    csv.row(cells);
  }

  json manifest;
  manifest["mode"] = "report";
  manifest["base_hash"] = base;
  manifest["inputs"] = manifest_paths;
  manifest["files"] = std::vector<std::string>{"comparison.csv"};
  manifest["status"] = "ok";
  manifest["wall_seconds"] = elapsed_seconds(t0);
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  return 0;
}

}  // namespace bsgame
