#include "rigidity/mather.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

#include "rigidity/errors.hpp"

namespace rigidity {

double separatrix_constant(const PeriodicPotential1D& V) {
  return MechanicalSystem1D(1.0, V).separatrix_constant();
}

double c_plus(const MechanicalSystem1D& sys, double E) { return action(sys, E); }

AlphaFunction1D::AlphaFunction1D(MechanicalSystem1D sys)
    : sys_(std::move(sys)), c_flat_(sys_.separatrix_action()) {}

double AlphaFunction1D::operator()(double c) const {
  if (in_flat_region(c)) return 0.0;
  return energy_of_action(sys_, std::abs(c));
}

double AlphaFunction1D::derivative(double c) const {
  if (in_flat_region(c)) return 0.0;
  const double w = frequency(sys_, energy_of_action(sys_, std::abs(c)));
  return c > 0.0 ? w : -w;
}

double alpha_1d(const MechanicalSystem1D& sys, double c) { return AlphaFunction1D(sys)(c); }

double alpha_sum(std::span<const MechanicalSystem1D> systems, std::span<const double> c) {
  if (systems.size() != c.size()) throw DomainError("alpha_sum: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += alpha_1d(systems[i], c[i]);
  return s;
}

InvariantGraph::InvariantGraph(std::span<const MechanicalSystem1D> systems,
                               std::span<const double> c)
    : systems_(systems.begin(), systems.end()), c_(c.begin(), c.end()) {
  if (systems.size() != c.size()) throw DomainError("invariant graph: dimension mismatch");
  alpha_i_.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const AlphaFunction1D a(systems_[i]);
    if (a.in_flat_region(c_[i]))
      throw DomainError("component " + std::to_string(i + 1) + " of c (" + std::to_string(c_[i]) +
                        ") lies in the flat region");
    alpha_i_[i] = a(c_[i]);
    alpha_ += alpha_i_[i];
  }
}

std::vector<double> InvariantGraph::grad_u(std::span<const double> x) const {
  if (x.size() != c_.size()) throw DomainError("invariant graph: dimension mismatch");
  std::vector<double> g(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double v = systems_[i].mu() * systems_[i].potential()(x[i]);
    const double p = std::sqrt(2.0 * (alpha_i_[i] + std::max(v, 0.0)));
    g[i] = -c_[i] + (c_[i] > 0.0 ? p : -p);
  }
  return g;
}

double InvariantGraph::residual(std::span<const double> x) const {
  const auto g = grad_u(x);
  double h = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double p = c_[i] + g[i];
    h += 0.5 * p * p - systems_[i].mu() * systems_[i].potential()(x[i]);
  }
  return h - alpha_;
}

std::vector<double> grad_u_c(std::span<const MechanicalSystem1D> systems, std::span<const double> c,
                             std::span<const double> x) {
  return InvariantGraph(systems, c).grad_u(x);
}

double graph_residual(std::span<const MechanicalSystem1D> systems, std::span<const double> c,
                      std::span<const double> x) {
  return InvariantGraph(systems, c).residual(x);
}

EdgeAnalysis edge_analysis(const MechanicalSystem1D& sys, double e_min, double e_max, int samples) {
  if (!(e_min > 0.0 && e_max > e_min) || samples < 3)
    throw DomainError("edge_analysis: need 0 < e_min < e_max and at least 3 samples");
  EdgeAnalysis r;
  r.c_flat = sys.separatrix_action();
  r.smallest_frequency = frequency(sys, e_min);
  if (sys.is_free()) {
    // No flat piece: alpha = c^2/2 has derivative 0 at c = 0 from both sides.
    r.log_divergence_certified = false;
    return r;
  }
  std::vector<double> L(samples), T(samples);
  const double l0 = std::log(1.0 / e_max), l1 = std::log(1.0 / e_min);
  double sl = 0, st = 0, sll = 0, slt = 0;
  for (int j = 0; j < samples; ++j) {
    L[j] = l0 + (l1 - l0) * j / (samples - 1);
    T[j] = period(sys, std::exp(-L[j]));
    sl += L[j];
    st += T[j];
    sll += L[j] * L[j];
    slt += L[j] * T[j];
  }
  const double n = samples;
  r.slope_a = (n * slt - sl * st) / (n * sll - sl * sl);
  r.intercept_b = (st - r.slope_a * sl) / n;
  for (int j = 0; j < samples; ++j)
    r.max_fit_residual =
        std::max(r.max_fit_residual, std::abs(r.slope_a * L[j] + r.intercept_b - T[j]) / T[j]);
  r.log_divergence_certified = r.slope_a > 0.0 && r.max_fit_residual < 1e-3;
  r.right_derivative =
      r.log_divergence_certified ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

void write_alpha_csv(const AlphaFunction1D& alpha, double c_min, double c_max, int n,
                     std::ostream& os) {
  if (n < 2) throw DomainError("alpha profile needs at least 2 samples");
  os << "c,alpha\n" << std::setprecision(17);
  for (int j = 0; j < n; ++j) {
    const double c = c_min + (c_max - c_min) * j / (n - 1);
    os << c << ',' << alpha(c) << '\n';
  }
}

}  // namespace rigidity
