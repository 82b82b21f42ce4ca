#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

#include "rigidity/action_angle.hpp"

namespace rigidity {

// integral over one period of sqrt(2 V) for a potential normalized to min 0.
double separatrix_constant(const PeriodicPotential1D& V);

// Cohomology class of the rotating torus at energy E: the action integral.
double c_plus(const MechanicalSystem1D& sys, double E);

// alpha(c) = 0 on the flat piece |c| <= c_flat = sqrt(mu) * separatrix
// constant, and the energy E with c_plus(E) = |c| outside it.
class AlphaFunction1D {
 public:
  explicit AlphaFunction1D(MechanicalSystem1D sys);

  const MechanicalSystem1D& system() const { return sys_; }
  double c_flat() const { return c_flat_; }
  bool in_flat_region(double c) const { return std::abs(c) <= c_flat_; }

  double operator()(double c) const;
  // alpha'(c) = sign(c) * frequency(E(c)) off the flat piece, 0 on it.
  double derivative(double c) const;

 private:
  MechanicalSystem1D sys_;
  double c_flat_;
};

double alpha_1d(const MechanicalSystem1D& sys, double c);
double alpha_sum(std::span<const MechanicalSystem1D> systems, std::span<const double> c);

// Invariant graph c + grad u_c of the unperturbed system for a cohomology
// class c off the flat pieces. The alpha_i(c_i) are computed once.
class InvariantGraph {
 public:
  // DomainError if any |c_i| lies in the flat region of axis i.
  InvariantGraph(std::span<const MechanicalSystem1D> systems, std::span<const double> c);

  double alpha() const { return alpha_; }
  const std::vector<double>& component_alphas() const { return alpha_i_; }
  std::vector<double> grad_u(std::span<const double> x) const;
  // H0(x, c + grad u_c(x)) - alpha(c).
  double residual(std::span<const double> x) const;

 private:
  std::vector<MechanicalSystem1D> systems_;
  std::vector<double> c_, alpha_i_;
  double alpha_ = 0.0;
};

std::vector<double> grad_u_c(std::span<const MechanicalSystem1D> systems, std::span<const double> c,
                             std::span<const double> x);

double graph_residual(std::span<const MechanicalSystem1D> systems, std::span<const double> c,
                      std::span<const double> x);

// Behaviour of alpha at the right edge of the flat piece. The period grows
// like T(E) = a ln(1/E) + b as E -> 0, so alpha'(c_flat+) = lim 1/T(E) = 0
// whenever a > 0. The fit covers E in [e_min, e_max] on a logarithmic grid.
struct EdgeAnalysis {
  double c_flat = 0.0;
  double slope_a = 0.0;
  double intercept_b = 0.0;
  double max_fit_residual = 0.0;  // relative, over the fit grid
  double left_derivative = 0.0;   // exact: alpha vanishes on the flat piece
  double right_derivative = 0.0;  // limit implied by the fit
  double smallest_frequency = 0.0;  // frequency at e_min
  bool log_divergence_certified = false;
};

EdgeAnalysis edge_analysis(const MechanicalSystem1D& sys, double e_min = 1e-12, double e_max = 1e-6,
                           int samples = 25);

// CSV with header c,alpha on n uniform samples of [c_min, c_max].
void write_alpha_csv(const AlphaFunction1D& alpha, double c_min, double c_max, int n,
                     std::ostream& os);

}  // namespace rigidity
