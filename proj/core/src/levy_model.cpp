#include "bsgame/levy_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bsgame {

JumpSpec JumpSpec::none() { return JumpSpec{}; }

JumpSpec JumpSpec::make_atoms(std::vector<JumpAtom> atoms) {
  JumpSpec spec;
  spec.family = Family::Atoms;
  spec.atoms = std::move(atoms);
  for (const auto& atom : spec.atoms) {
    if (!(atom.rate >= 0.0) || !std::isfinite(atom.rate)) {
      throw std::invalid_argument("JumpSpec: atom rates must be finite and nonnegative");
    }
    if (!std::isfinite(atom.size)) {
      throw std::invalid_argument("JumpSpec: atom sizes must be finite");
    }
  }
  return spec;
}

JumpSpec JumpSpec::exponential(double intensity, double decay) {
  if (!(intensity > 0.0) || !(decay > 0.0)) {
    throw std::invalid_argument("JumpSpec: exponential family needs intensity > 0 and decay > 0");
  }
  JumpSpec spec;
  spec.family = Family::Exponential;
  spec.intensity = intensity;
  spec.decay = decay;
  return spec;
}

double JumpSpec::total_rate() const {
  switch (family) {
    case Family::None:
      return 0.0;
    case Family::Atoms: {
      double total = 0.0;
      for (const auto& atom : atoms) total += atom.rate;
      return total;
    }
    case Family::Exponential:
      return intensity;
  }
  return 0.0;
}

double moment(const JumpSpec& jumps, int j) {
  if (j < 1) throw std::invalid_argument("moment: order must be >= 1");
  switch (jumps.family) {
    case JumpSpec::Family::None:
      return 0.0;
    case JumpSpec::Family::Atoms: {
      double sum = 0.0;
      for (const auto& atom : jumps.atoms) sum += atom.rate * std::pow(atom.size, j);
      return sum;
    }
    case JumpSpec::Family::Exponential: {
      // integral of x^j * lambda * beta * exp(-beta x) dx = lambda * j! / beta^j
      double value = jumps.intensity;
      for (int i = 1; i <= j; ++i) value *= static_cast<double>(i) / jumps.decay;
      return value;
    }
  }
  return 0.0;
}

double moment_quadrature(const JumpSpec& jumps, int j) {
  if (j < 1) throw std::invalid_argument("moment_quadrature: order must be >= 1");
  switch (jumps.family) {
    case JumpSpec::Family::None:
      return 0.0;
    case JumpSpec::Family::Atoms:
      // The measure is purely atomic; quadrature degenerates to the same sum.
      return moment(jumps, j);
    case JumpSpec::Family::Exponential: {
      // Composite Simpson on (0, cutoff] against lambda*beta*exp(-beta x).
      // Integrand decays like exp(-beta x); cutoff where x^j exp(-beta x)
      // is far below double precision relative to the peak at j/beta.
      const double beta = jumps.decay;
      const double cutoff = (static_cast<double>(j) + 60.0) / beta;
      const int panels = 20000;  // even
      const double h = cutoff / panels;
      auto f = [&](double x) {
        return std::pow(x, j) * jumps.intensity * beta * std::exp(-beta * x);
      };
      double sum = f(0.0) + f(cutoff);
      for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
      return sum * h / 3.0;
    }
  }
  return 0.0;
}

MomentTable MomentTable::build(const JumpSpec& jumps, int max_order) {
  if (max_order < 1) throw std::invalid_argument("MomentTable: max_order must be >= 1");
  MomentTable table;
  table.m.resize(max_order);
  for (int j = 1; j <= max_order; ++j) table.m[j - 1] = moment(jumps, j);
  return table;
}

double MomentTable::value(int j) const {
  if (j < 1 || j > max_order()) throw std::invalid_argument("MomentTable: order out of range");
  return m[j - 1];
}

Eigen::MatrixXd gram_matrix(const LevyTriplet& triplet, int order) {
  if (order < 1) throw std::invalid_argument("gram_matrix: order must be >= 1");
  const MomentTable table = MomentTable::build(triplet.jumps, 2 * order + 2);
  Eigen::MatrixXd gram(order, order);
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      gram(i, j) = table.value(i + j + 2);
    }
  }
  gram(0, 0) += triplet.sigma * triplet.sigma;
  return gram;
}

int effective_order(const Eigen::MatrixXd& gram, double tol) {
  const auto dim = gram.rows();
  if (dim != gram.cols()) throw std::invalid_argument("effective_order: matrix must be square");
  // Incremental Cholesky; pivot_k = L(k,k)^2. Stop at the first pivot <= tol.
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    double pivot = gram(k, k);
    for (Eigen::Index j = 0; j < k; ++j) pivot -= chol(k, j) * chol(k, j);
    if (!(pivot > tol)) return static_cast<int>(k);
    chol(k, k) = std::sqrt(pivot);
    for (Eigen::Index i = k + 1; i < dim; ++i) {
      double value = gram(i, k);
      for (Eigen::Index j = 0; j < k; ++j) value -= chol(i, j) * chol(k, j);
      chol(i, k) = value / chol(k, k);
    }
  }
  return static_cast<int>(dim);
}

ValidationReport validate(const LevyTriplet& triplet) {
  ValidationReport report;
  std::ostringstream note;

  if (!(triplet.sigma >= 0.0) || !std::isfinite(triplet.sigma)) {
    report.error = "sigma must be finite and >= 0";
    return report;
  }
  if (!std::isfinite(triplet.mean_rate)) {
    report.error = "mean_rate must be finite";
    return report;
  }

  const double total = triplet.jumps.total_rate();
  if (!std::isfinite(total)) {
    report.error = "total jump intensity must be finite";
    return report;
  }
  for (const auto& atom : triplet.jumps.atoms) {
    if (atom.rate < 0.0) {
      report.error = "atom rates must be nonnegative";
      return report;
    }
  }

  const bool no_jumps = triplet.jumps.family == JumpSpec::Family::None || total == 0.0;
  if (triplet.sigma == 0.0 && no_jumps) {
    report.error = "degenerate driver: sigma = 0 and no jumps";
    return report;
  }

  switch (triplet.jumps.family) {
    case JumpSpec::Family::None:
      note << "pure Gaussian driver (sigma = " << triplet.sigma << ")";
      break;
    case JumpSpec::Family::Atoms:
      // A finite atomic measure has compact support, so exp(lambda'|x|) is
      // integrable for every lambda'.
      note << "atomic jump measure, " << triplet.jumps.atoms.size()
           << " atom(s), total intensity " << total
           << "; exponential moments finite for every exponent";
      break;
    case JumpSpec::Family::Exponential:
      // exp(lambda'|x|) integrable against exp(-beta x) exactly for lambda' < beta.
      note << "exponential jump measure (intensity " << triplet.jumps.intensity << ", decay "
           << triplet.jumps.decay << "); exponential moments finite for exponents < "
           << triplet.jumps.decay;
      break;
  }
  report.notes.push_back(note.str());
  report.notes.push_back("all power moments m_j finite; finite activity keeps simulation exact");
  report.valid = true;
  return report;
}

}  // namespace bsgame
