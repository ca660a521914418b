#include "bsgame/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bsgame/common.hpp"

namespace bsgame {

namespace {

using nlohmann::json;

struct Parser {
  std::vector<FieldError> errs;

  void fail(const std::string& path, const std::string& msg) { errs.push_back({path, msg}); }

  const json* object(const json& j, const char* key, const std::string& path, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path, "missing required object");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(path, "must be an object");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& j, const char* key, const std::string& path, bool required,
                double def = 0.0) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path, "missing required number");
      return def;
    }
    if (!it->is_number()) {
      fail(path, "must be a number");
      return def;
    }
    return it->get<double>();
  }

  int integer(const json& j, const char* key, const std::string& path, bool required,
              int def = 0) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path, "missing required integer");
      return def;
    }
    if (!it->is_number_integer()) {
      fail(path, "must be an integer");
      return def;
    }
    return it->get<int>();
  }

  std::string text(const json& j, const char* key, const std::string& path, bool required,
                   const std::string& def = "") {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path, "missing required string");
      return def;
    }
    if (!it->is_string()) {
      fail(path, "must be a string");
      return def;
    }
    return it->get<std::string>();
  }
};

// number -> 1x1; flat array -> column vector; array of equal-length arrays
// -> matrix. Returns false on anything else.
bool read_matrix(const json& j, Eigen::MatrixXd& out) {
  if (j.is_number()) {
    out.resize(1, 1);
    out(0, 0) = j.get<double>();
    return true;
  }
  if (!j.is_array() || j.empty()) return false;
  if (j[0].is_number()) {
    out.resize(static_cast<Eigen::Index>(j.size()), 1);
    for (size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) return false;
      out(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
    }
    return true;
  }
  if (!j[0].is_array() || j[0].empty()) return false;
  const size_t cols = j[0].size();
  out.resize(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) return false;
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) return false;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return true;
}

bool read_time_varying(const json& j, TimeVarying& out) {
  if (j.is_object()) {
    auto bit = j.find("breaks");
    auto vit = j.find("values");
    if (bit == j.end() || vit == j.end() || !bit->is_array() || !vit->is_array()) return false;
    if (vit->size() != bit->size() + 1) return false;
    out.breaks.clear();
    out.values.clear();
    for (const auto& b : *bit) {
      if (!b.is_number()) return false;
      out.breaks.push_back(b.get<double>());
    }
    if (!std::is_sorted(out.breaks.begin(), out.breaks.end())) return false;
    for (const auto& v : *vit) {
      Eigen::MatrixXd m;
      if (!read_matrix(v, m)) return false;
      out.values.push_back(std::move(m));
    }
    return true;
  }
  Eigen::MatrixXd m;
  if (!read_matrix(j, m)) return false;
  out = TimeVarying::constant(std::move(m));
  return true;
}

// A per-component list (array of `count` entries) or one entry broadcast to
// all components.
bool read_tv_list(const json& j, int count, std::vector<TimeVarying>& out) {
  out.clear();
  if (j.is_array() && static_cast<int>(j.size()) == count) {
    bool all_ok = true;
    std::vector<TimeVarying> parts(count);
    for (int i = 0; i < count && all_ok; ++i) all_ok = read_time_varying(j[i], parts[i]);
    if (all_ok) {
      out = std::move(parts);
      return true;
    }
  }
  TimeVarying tv;
  if (!read_time_varying(j, tv)) return false;
  out.assign(count, tv);
  return true;
}

void parse_levy(Parser& p, const json& root, ProblemConfig& cfg) {
  const json* levy = p.object(root, "levy", "levy", true);
  if (!levy) return;
  cfg.levy.mean_rate = p.number(*levy, "mean_rate", "levy.mean_rate", false, 0.0);
  cfg.levy.sigma = p.number(*levy, "sigma", "levy.sigma", true, 0.0);
  const json* jumps = p.object(*levy, "jumps", "levy.jumps", true);
  if (!jumps) return;
  const std::string type = p.text(*jumps, "type", "levy.jumps.type", true);
  if (type == "none") {
    cfg.levy.jumps = JumpSpec::none();
  } else if (type == "atoms") {
    auto it = jumps->find("atoms");
    if (it == jumps->end() || !it->is_array() || it->empty()) {
      p.fail("levy.jumps.atoms", "must be a nonempty array of {size, rate}");
      return;
    }
    std::vector<JumpAtom> atoms;
    for (size_t i = 0; i < it->size(); ++i) {
      const json& a = (*it)[i];
      char path[48];
      std::snprintf(path, sizeof path, "levy.jumps.atoms[%zu]", i);
      if (!a.is_object()) {
        p.fail(path, "must be an object {size, rate}");
        continue;
      }
      JumpAtom atom;
      atom.size = p.number(a, "size", std::string(path) + ".size", true);
      atom.rate = p.number(a, "rate", std::string(path) + ".rate", true);
      atoms.push_back(atom);
    }
    if (p.errs.empty()) {
      try {
        cfg.levy.jumps = JumpSpec::make_atoms(std::move(atoms));
      } catch (const std::invalid_argument& e) {
        p.fail("levy.jumps.atoms", e.what());
      }
    }
  } else if (type == "exponential") {
    const double intensity = p.number(*jumps, "intensity", "levy.jumps.intensity", true);
    const double decay = p.number(*jumps, "decay", "levy.jumps.decay", true);
    if (p.errs.empty()) {
      try {
        cfg.levy.jumps = JumpSpec::exponential(intensity, decay);
      } catch (const std::invalid_argument& e) {
        p.fail("levy.jumps", e.what());
      }
    }
  } else {
    p.fail("levy.jumps.type", "must be one of \"none\", \"atoms\", \"exponential\"");
  }
}

InfoStructure parse_info_entry(Parser& p, const json& j, const std::string& path) {
  const std::string type = p.text(j, "type", path + ".type", true, "full");
  if (type == "full") return InfoStructure::full();
  if (type == "trivial") return InfoStructure::trivial();
  if (type == "delayed") {
    const double delta = p.number(j, "delta", path + ".delta", true);
    if (delta < 0.0) {
      p.fail(path + ".delta", "must be >= 0");
      return InfoStructure::full();
    }
    return InfoStructure::delayed(delta);
  }
  p.fail(path + ".type", "must be one of \"full\", \"trivial\", \"delayed\"");
  return InfoStructure::full();
}

void parse_info(Parser& p, const json& root, ProblemConfig& cfg) {
  auto it = root.find("info");
  if (it == root.end()) return;  // both default to full information
  if (!it->is_object()) {
    p.fail("info", "must be an object");
    return;
  }
  if (it->contains("player1") || it->contains("player2")) {
    const json* p1 = p.object(*it, "player1", "info.player1", true);
    const json* p2 = p.object(*it, "player2", "info.player2", true);
    if (p1) cfg.info1 = parse_info_entry(p, *p1, "info.player1");
    if (p2) cfg.info2 = parse_info_entry(p, *p2, "info.player2");
  } else {
    cfg.info1 = parse_info_entry(p, *it, "info");
    cfg.info2 = cfg.info1;
  }
}

void parse_problem(Parser& p, const json& root, ProblemConfig& cfg) {
  auto it = root.find("problem");
  if (it == root.end()) return;
  if (!it->is_object()) {
    p.fail("problem", "must be an object");
    return;
  }
  cfg.has_problem = true;
  const json& pr = *it;
  const std::string kind = p.text(pr, "kind", "problem.kind", false, "lq");
  if (kind != "lq") {
    p.fail("problem.kind", "only \"lq\" is supported in configuration files");
    return;
  }
  cfg.lq.n = cfg.n;
  cfg.lq.d = cfg.d;
  cfg.lq.m1 = cfg.m1;
  cfg.lq.m2 = cfg.m2;
  cfg.lq.order = cfg.order;

  auto tv_field = [&](const char* key, const std::string& path, Eigen::Index rows,
                      Eigen::Index cols, bool required, TimeVarying& out) {
    auto f = pr.find(key);
    if (f == pr.end()) {
      if (required) {
        p.fail(path, "missing required matrix");
      } else {
        out = TimeVarying::constant(Eigen::MatrixXd::Zero(rows, cols));
      }
      return;
    }
    if (!read_time_varying(*f, out)) p.fail(path, "malformed matrix");
  };
  auto tv_list_field = [&](const char* key, const std::string& path, int count,
                           Eigen::Index rows, Eigen::Index cols, std::vector<TimeVarying>& out) {
    auto f = pr.find(key);
    if (f == pr.end()) {
      out.assign(count, TimeVarying::constant(Eigen::MatrixXd::Zero(rows, cols)));
      return;
    }
    if (!read_tv_list(*f, count, out)) p.fail(path, "malformed matrix list");
  };

  tv_field("A", "problem.A", cfg.n, cfg.n, false, cfg.lq.A);
  tv_list_field("B", "problem.B", cfg.d, cfg.n, cfg.n, cfg.lq.B);
  tv_list_field("C", "problem.C", cfg.order, cfg.n, cfg.n, cfg.lq.C);
  tv_field("D1", "problem.D1", cfg.n, cfg.m1, true, cfg.lq.D1);
  tv_field("D2", "problem.D2", cfg.n, cfg.m2, true, cfg.lq.D2);
  tv_field("E", "problem.E", cfg.n, 1, false, cfg.lq.E);
  tv_list_field("F", "problem.F", cfg.d, cfg.n, 1, cfg.lq.F);
  tv_list_field("G", "problem.G", cfg.order, cfg.n, 1, cfg.lq.G);
  auto mit = pr.find("M");
  if (mit == pr.end()) {
    cfg.lq.M = Eigen::VectorXd::Zero(cfg.n);
  } else {
    Eigen::MatrixXd m;
    if (!read_matrix(*mit, m) || m.cols() != 1) {
      p.fail("problem.M", "must be a vector");
    } else {
      cfg.lq.M = m.col(0);
    }
  }
  tv_field("N1", "problem.N1", cfg.m1, cfg.m1, true, cfg.lq.N1);
  tv_field("N2", "problem.N2", cfg.m2, cfg.m2, true, cfg.lq.N2);

  auto xit = pr.find("xi");
  if (xit == pr.end()) return;
  if (!xit->is_object()) {
    p.fail("problem.xi", "must be an object");
    return;
  }
  cfg.has_terminal = true;
  const std::string xtype = p.text(*xit, "type", "problem.xi.type", true, "constant");
  auto vec_field = [&](const char* key, const std::string& path, bool required,
                       Eigen::VectorXd& out) {
    auto f = xit->find(key);
    if (f == xit->end()) {
      if (required) p.fail(path, "missing required vector");
      out = Eigen::VectorXd::Zero(cfg.n);
      return;
    }
    Eigen::MatrixXd m;
    if (!read_matrix(*f, m) || m.cols() != 1 || m.rows() != cfg.n) {
      p.fail(path, "must be a vector of length dims.n");
      out = Eigen::VectorXd::Zero(cfg.n);
      return;
    }
    out = m.col(0);
  };
  auto mat_field = [&](const char* key, const std::string& path, Eigen::Index cols,
                       Eigen::MatrixXd& out) {
    auto f = xit->find(key);
    if (f == xit->end()) {
      out = Eigen::MatrixXd::Zero(cfg.n, cols);
      return;
    }
    Eigen::MatrixXd m;
    if (!read_matrix(*f, m)) {
      p.fail(path, "malformed matrix");
      out = Eigen::MatrixXd::Zero(cfg.n, cols);
      return;
    }
    if (m.rows() == cfg.n && m.cols() == cols) {
      out = m;
    } else if (cfg.n == 1 && m.cols() == 1 && m.rows() == cols) {
      out = m.transpose();  // row written as a flat list
    } else {
      p.fail(path, "shape must be dims.n by the component count");
      out = Eigen::MatrixXd::Zero(cfg.n, cols);
    }
  };
  if (xtype == "constant") {
    cfg.terminal.kind = TerminalConfig::Kind::Constant;
    vec_field("value", "problem.xi.value", true, cfg.terminal.value);
  } else if (xtype == "affine") {
    cfg.terminal.kind = TerminalConfig::Kind::Affine;
    vec_field("value", "problem.xi.value", false, cfg.terminal.value);
    mat_field("w", "problem.xi.w", cfg.d, cfg.terminal.w);
    mat_field("h", "problem.xi.h", cfg.order, cfg.terminal.h);
  } else {
    p.fail("problem.xi.type", "must be \"constant\" or \"affine\"");
  }
}

ProblemConfig parse_json(const json& root) {
  Parser p;
  ProblemConfig cfg;

  parse_levy(p, root, cfg);

  const json* dims = p.object(root, "dims", "dims", true);
  if (dims) {
    cfg.n = p.integer(*dims, "n", "dims.n", false, 1);
    cfg.d = p.integer(*dims, "d", "dims.d", true, 1);
    cfg.m1 = p.integer(*dims, "m1", "dims.m1", false, 1);
    cfg.m2 = p.integer(*dims, "m2", "dims.m2", false, 1);
    cfg.order = p.integer(*dims, "K", "dims.K", true, 1);
    if (cfg.n < 1) p.fail("dims.n", "must be >= 1");
    if (cfg.d < 1) p.fail("dims.d", "must be >= 1");
    if (cfg.m1 < 1) p.fail("dims.m1", "must be >= 1");
    if (cfg.m2 < 1) p.fail("dims.m2", "must be >= 1");
    if (cfg.order < 1) p.fail("dims.K", "must be >= 1");
  }

  const json* grid = p.object(root, "grid", "grid", true);
  if (grid) {
    cfg.horizon = p.number(*grid, "T", "grid.T", true, 1.0);
    cfg.steps = p.integer(*grid, "steps", "grid.steps", true, 1);
    if (!(cfg.horizon > 0.0)) p.fail("grid.T", "must be > 0");
    if (cfg.steps < 1) p.fail("grid.steps", "must be >= 1");
  }

  const json* mc = p.object(root, "mc", "mc", true);
  if (mc) {
    cfg.paths = p.integer(*mc, "paths", "mc.paths", true, 1);
    if (cfg.paths < 1) p.fail("mc.paths", "must be >= 1");
    auto it = mc->find("seed");
    if (it == mc->end() || !it->is_number_unsigned()) {
      p.fail("mc.seed", "missing required non-negative integer");
    } else {
      cfg.seed = it->get<std::uint64_t>();
    }
  }

  parse_info(p, root, cfg);

  auto rit = root.find("regression");
  if (rit != root.end() && rit->is_object()) {
    cfg.regression.degree = p.integer(*rit, "degree", "regression.degree", false, 2);
    cfg.regression.ridge = p.number(*rit, "ridge", "regression.ridge", false, 0.0);
    if (cfg.regression.degree < 1) p.fail("regression.degree", "must be >= 1");
    if (cfg.regression.ridge < 0.0) p.fail("regression.ridge", "must be >= 0");
  } else if (rit != root.end()) {
    p.fail("regression", "must be an object");
  }

  if (p.errs.empty()) parse_problem(p, root, cfg);

  auto oit = root.find("outputs");
  if (oit != root.end() && oit->is_object()) {
    cfg.outputs.directory = p.text(*oit, "directory", "outputs.directory", false, "out");
    auto fit = oit->find("formats");
    if (fit != oit->end()) {
      if (!fit->is_array()) {
        p.fail("outputs.formats", "must be an array of \"csv\" / \"json\"");
      } else {
        cfg.outputs.csv = false;
        cfg.outputs.json = false;
        for (const auto& f : *fit) {
          if (f == "csv") cfg.outputs.csv = true;
          else if (f == "json") cfg.outputs.json = true;
          else p.fail("outputs.formats", "entries must be \"csv\" or \"json\"");
        }
      }
    }
  }

  if (!p.errs.empty()) throw ConfigError("invalid configuration", std::move(p.errs));

  ValidationReport levy_report = validate(cfg.levy);
  if (!levy_report.valid) {
    throw ConfigError("invalid configuration",
                      {{"levy", levy_report.error}});
  }
  if (cfg.has_problem) validate_lq(cfg.lq);
  return cfg;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json tv_to_json(const TimeVarying& tv) {
  json out;
  out["breaks"] = tv.breaks;
  json vals = json::array();
  for (const auto& v : tv.values) vals.push_back(matrix_to_json(v));
  out["values"] = std::move(vals);
  return out;
}

json canonical_json(const ProblemConfig& cfg) {
  json j;
  j["levy"]["mean_rate"] = cfg.levy.mean_rate;
  j["levy"]["sigma"] = cfg.levy.sigma;
  switch (cfg.levy.jumps.family) {
    case JumpSpec::Family::None:
      j["levy"]["jumps"]["type"] = "none";
      break;
    case JumpSpec::Family::Atoms: {
      j["levy"]["jumps"]["type"] = "atoms";
      json atoms = json::array();
      for (const auto& a : cfg.levy.jumps.atoms) {
        atoms.push_back({{"size", a.size}, {"rate", a.rate}});
      }
      j["levy"]["jumps"]["atoms"] = std::move(atoms);
      break;
    }
    case JumpSpec::Family::Exponential:
      j["levy"]["jumps"]["type"] = "exponential";
      j["levy"]["jumps"]["intensity"] = cfg.levy.jumps.intensity;
      j["levy"]["jumps"]["decay"] = cfg.levy.jumps.decay;
      break;
  }
  j["dims"] = {{"n", cfg.n}, {"d", cfg.d}, {"m1", cfg.m1}, {"m2", cfg.m2}, {"K", cfg.order}};
  j["grid"] = {{"T", cfg.horizon}, {"steps", cfg.steps}};
  j["mc"] = {{"paths", cfg.paths}, {"seed", cfg.seed}};
  auto info_json = [](const InfoStructure& info) {
    json out;
    switch (info.kind) {
      case InfoStructure::Kind::Full: out["type"] = "full"; break;
      case InfoStructure::Kind::Trivial: out["type"] = "trivial"; break;
      case InfoStructure::Kind::Delayed:
        out["type"] = "delayed";
        out["delta"] = info.delay;
        break;
    }
    return out;
  };
  j["info"]["player1"] = info_json(cfg.info1);
  j["info"]["player2"] = info_json(cfg.info2);
  j["regression"] = {{"degree", cfg.regression.degree}, {"ridge", cfg.regression.ridge}};
  if (cfg.has_problem) {
    json pr;
    pr["kind"] = "lq";
    pr["A"] = tv_to_json(cfg.lq.A);
    for (const auto& b : cfg.lq.B) pr["B"].push_back(tv_to_json(b));
    for (const auto& c : cfg.lq.C) pr["C"].push_back(tv_to_json(c));
    pr["D1"] = tv_to_json(cfg.lq.D1);
    pr["D2"] = tv_to_json(cfg.lq.D2);
    pr["E"] = tv_to_json(cfg.lq.E);
    for (const auto& f : cfg.lq.F) pr["F"].push_back(tv_to_json(f));
    for (const auto& g : cfg.lq.G) pr["G"].push_back(tv_to_json(g));
    pr["M"] = matrix_to_json(cfg.lq.M);
    pr["N1"] = tv_to_json(cfg.lq.N1);
    pr["N2"] = tv_to_json(cfg.lq.N2);
    if (cfg.has_terminal) {
      json xi;
      xi["type"] = cfg.terminal.kind == TerminalConfig::Kind::Constant ? "constant" : "affine";
      xi["value"] = matrix_to_json(cfg.terminal.value);
      if (cfg.terminal.kind == TerminalConfig::Kind::Affine) {
        xi["w"] = matrix_to_json(cfg.terminal.w);
        xi["h"] = matrix_to_json(cfg.terminal.h);
      }
      pr["xi"] = std::move(xi);
    }
    j["problem"] = std::move(pr);
  }
  return j;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace

ProblemConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("configuration root must be a JSON object");
  return parse_json(root);
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_hash(const ProblemConfig& cfg) {
  return fnv1a_hex(canonical_json(cfg).dump());
}

std::string base_hash(const ProblemConfig& cfg) {
  json j = canonical_json(cfg);
  j["mc"].erase("seed");
  j["mc"].erase("paths");
  j["grid"].erase("steps");
  return fnv1a_hex(j.dump());
}

TerminalFn make_terminal(const TerminalConfig& terminal, int n, int d, int order_used) {
  if (terminal.value.size() != n) {
    throw ConfigError("terminal data: value length does not match the state dimension");
  }
  if (terminal.kind == TerminalConfig::Kind::Constant) {
    Eigen::VectorXd v = terminal.value;
    return [v](const PathView&, Eigen::VectorXd& out) { out = v; };
  }
  if (terminal.w.rows() != n || terminal.w.cols() != d) {
    throw ConfigError("terminal data: Brownian loading shape mismatch");
  }
  if (terminal.h.rows() != n) {
    throw ConfigError("terminal data: martingale loading shape mismatch");
  }
  if (terminal.h.cols() > order_used) {
    // A truncated basis silently changing xi would corrupt the run.
    for (Eigen::Index c = order_used; c < terminal.h.cols(); ++c) {
      if (terminal.h.col(c).cwiseAbs().maxCoeff() > 0.0) {
        throw ConfigError(
            "terminal data: nonzero loading on a martingale beyond the usable order");
      }
    }
  }
  Eigen::VectorXd v = terminal.value;
  Eigen::MatrixXd w = terminal.w;
  Eigen::MatrixXd h = terminal.h;
  const int hcols = static_cast<int>(std::min<Eigen::Index>(h.cols(), order_used));
  return [v, w, h, hcols](const PathView& path, Eigen::VectorXd& out) {
    out = v;
    for (int i = 0; i < w.cols(); ++i) out += w.col(i) * path.w_terminal(i);
    for (int i = 0; i < hcols; ++i) out += h.col(i) * path.h_terminal(i + 1);
  };
}

}  // namespace bsgame
