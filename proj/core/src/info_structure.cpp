#include "bsgame/info_structure.hpp"

#include <cmath>

#include "bsgame/common.hpp"
#include "bsgame/regression.hpp"

namespace bsgame {

InfoStructure InfoStructure::delayed(double delta) {
  if (!(delta >= 0.0)) throw ConfigError("info structure: delay must be >= 0");
  return {Kind::Delayed, delta};
}

Eigen::MatrixXd NoiseLevels::variables_at(int gridpoint) const {
  if (gridpoint < 0 || gridpoint > grid.steps) {
    throw ConfigError("noise levels: gridpoint out of range");
  }
  Eigen::MatrixXd vars(n_paths, n_variables());
  for (int p = 0; p < n_paths; ++p) {
    int c = 0;
    for (int i = 0; i < dim_w; ++i) vars(p, c++) = w_at(p, gridpoint, i);
    vars(p, c++) = wl_at(p, gridpoint);
    for (int i = 1; i <= order; ++i) vars(p, c++) = h_at(p, gridpoint, i);
  }
  return vars;
}

NoiseLevels accumulate_levels(const PathBundle& bundle, const TeugelIncrements& incs) {
  if (incs.n_paths != bundle.n_paths || incs.steps != bundle.grid.steps) {
    throw ConfigError("accumulate_levels: bundle and increments disagree on shape");
  }
  NoiseLevels lv;
  lv.grid = bundle.grid;
  lv.n_paths = bundle.n_paths;
  lv.dim_w = bundle.dim_w;
  lv.order = incs.order;
  const int gp = bundle.grid.steps + 1;
  lv.w.assign(static_cast<size_t>(lv.n_paths) * gp * lv.dim_w, 0.0);
  lv.wl.assign(static_cast<size_t>(lv.n_paths) * gp, 0.0);
  lv.h.assign(static_cast<size_t>(lv.n_paths) * gp * lv.order, 0.0);
  for (int p = 0; p < lv.n_paths; ++p) {
    for (int k = 0; k < bundle.grid.steps; ++k) {
      for (int i = 0; i < lv.dim_w; ++i) {
        lv.w[(static_cast<size_t>(p) * gp + k + 1) * lv.dim_w + i] =
            lv.w_at(p, k, i) + bundle.dw(p, k, i);
      }
      lv.wl[static_cast<size_t>(p) * gp + k + 1] = lv.wl_at(p, k) + bundle.dwl(p, k);
      for (int i = 1; i <= lv.order; ++i) {
        lv.h[(static_cast<size_t>(p) * gp + k + 1) * lv.order + (i - 1)] =
            lv.h_at(p, k, i) + incs.value(p, k, i);
      }
    }
  }
  return lv;
}

int conditioning_gridpoint(const TimeGrid& grid, int gridpoint, double delay) {
  if (gridpoint < 0 || gridpoint > grid.steps) {
    throw ConfigError("conditioning_gridpoint: gridpoint out of range");
  }
  const double t_visible = grid.time(gridpoint) - delay;
  if (t_visible <= 1e-12) return -1;
  int k = static_cast<int>(std::floor(t_visible / grid.dt() + 1e-9));
  if (k > gridpoint) k = gridpoint;
  if (k < 0) return -1;
  return k;
}

namespace {

Eigen::MatrixXd trivial_projection(const Eigen::MatrixXd& values) {
  Eigen::RowVectorXd mean = values.colwise().mean();
  return mean.replicate(values.rows(), 1);
}

}  // namespace

Eigen::MatrixXd regress_on(const Eigen::MatrixXd& values, const Eigen::MatrixXd& variables,
                           const RegressionConfig& cfg) {
  if (cfg.degree < 0) throw ConfigError("regression: negative degree");
  if (values.rows() != variables.rows()) {
    throw ConfigError("regression: sample count mismatch");
  }
  PolynomialBasis basis =
      PolynomialBasis::total_degree(static_cast<int>(variables.cols()), cfg.degree);
  Eigen::MatrixXd design = basis.evaluate(variables);
  LeastSquaresFit fit = fit_least_squares(design, values, cfg.ridge);
  if (fit.ridge_bumped) {
    warn("regression: rank-deficient design, ridge bump applied");
  }
  return fit.fitted;
}

Eigen::MatrixXd cond_exp_columns(const Eigen::MatrixXd& values, const InfoStructure& info,
                                 const NoiseLevels& levels, int gridpoint,
                                 const RegressionConfig& cfg) {
  if (values.rows() != levels.n_paths) {
    throw ConfigError("cond_exp: value rows must match path count");
  }
  if (!values.allFinite()) throw NumericError("cond_exp: non-finite values");
  switch (info.kind) {
    case InfoStructure::Kind::Full:
      return values;
    case InfoStructure::Kind::Trivial:
      return trivial_projection(values);
    case InfoStructure::Kind::Delayed: {
      const int k = conditioning_gridpoint(levels.grid, gridpoint, info.delay);
      if (k < 0) return trivial_projection(values);
      return regress_on(values, levels.variables_at(k), cfg);
    }
  }
  throw ConfigError("cond_exp: unknown info structure");
}

Eigen::VectorXd cond_exp(const Eigen::VectorXd& values, const InfoStructure& info,
                         const NoiseLevels& levels, int gridpoint,
                         const RegressionConfig& cfg) {
  return cond_exp_columns(values, info, levels, gridpoint, cfg).col(0);
}

AdaptednessReport is_adapted(const Eigen::MatrixXd& process, const InfoStructure& info,
                             const NoiseLevels& levels, int first_gridpoint,
                             const RegressionConfig& cfg) {
  if (process.rows() != levels.n_paths) {
    throw ConfigError("is_adapted: process rows must match path count");
  }
  AdaptednessReport rep;
  rep.per_time.resize(process.cols(), 0.0);
  switch (info.kind) {
    case InfoStructure::Kind::Full: {
      rep.adapted = true;
      rep.note = "full information: any function of the driving noise is admissible";
      return rep;
    }
    case InfoStructure::Kind::Trivial: {
      for (Eigen::Index c = 0; c < process.cols(); ++c) {
        const double mean = process.col(c).mean();
        rep.per_time[c] = (process.col(c).array() - mean).abs().maxCoeff();
        rep.worst = std::max(rep.worst, rep.per_time[c]);
      }
      rep.adapted = rep.worst <= 1e-10;
      rep.note = "trivial information requires deterministic values";
      return rep;
    }
    case InfoStructure::Kind::Delayed: {
      double min_r2 = 1.0;
      for (Eigen::Index c = 0; c < process.cols(); ++c) {
        const int g = first_gridpoint + static_cast<int>(c);
        const int k = conditioning_gridpoint(levels.grid, g, info.delay);
        const double mean = process.col(c).mean();
        const double sst = (process.col(c).array() - mean).square().sum();
        if (k < 0) {
          const double spread = (process.col(c).array() - mean).abs().maxCoeff();
          rep.per_time[c] = spread <= 1e-10 ? 0.0 : 1.0;
          rep.worst = std::max(rep.worst, rep.per_time[c]);
          min_r2 = std::min(min_r2, 1.0 - rep.per_time[c]);
          continue;
        }
        if (sst <= 1e-20 * static_cast<double>(process.rows())) {
          rep.per_time[c] = 0.0;  // constant column: trivially measurable
          continue;
        }
        const Eigen::MatrixXd fitted =
            regress_on(process.col(c), levels.variables_at(k), cfg);
        const double ssr = (process.col(c) - fitted.col(0)).squaredNorm();
        const double one_minus_r2 = ssr / sst;
        rep.per_time[c] = one_minus_r2;
        rep.worst = std::max(rep.worst, one_minus_r2);
        min_r2 = std::min(min_r2, 1.0 - one_minus_r2);
      }
      rep.adapted = rep.worst <= 1e-6;
      rep.note = "delayed information: residual variance after projecting on visible noise";
      return rep;
    }
  }
  throw ConfigError("is_adapted: unknown info structure");
}

}  // namespace bsgame
