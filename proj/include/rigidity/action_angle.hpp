#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rigidity/potentials.hpp"

namespace rigidity {

// H(p, x) = p^2/2 - mu V(x) with V normalized to min 0.
class MechanicalSystem1D {
 public:
  MechanicalSystem1D() : MechanicalSystem1D(0.0, PeriodicPotential1D::constant(0.0)) {}
  // Raises DomainError for mu < 0 or a potential whose minimum is not 0.
  MechanicalSystem1D(double mu, PeriodicPotential1D V);

  static MechanicalSystem1D free() { return {}; }
  static MechanicalSystem1D pendulum(double mu) { return {mu, PeriodicPotential1D::pendulum()}; }

  double mu() const { return mu_; }
  const PeriodicPotential1D& potential() const { return V_; }
  // True when mu V vanishes identically, so x = theta and omega = sqrt(2E).
  bool is_free() const { return free_; }
  double max_potential() const { return max_V_; }
  // Local minima of V in [0,1), sorted. Quadrature panels are split here.
  const std::vector<double>& wells() const { return wells_; }
  // integral of sqrt(2 V) over one period.
  double separatrix_constant() const { return sep_const_; }
  // sqrt(mu) times the separatrix constant: the action of the separatrix.
  double separatrix_action() const;

  // Mean over one period of a smooth periodic integrand built from V. Uses the
  // doubling trapezoid rule, switching to tanh-sinh panels split at the wells
  // when the integrand is close to the separatrix (ratio = E / (mu max V) small).
  template <class F>
  double period_integral(F&& f, double ratio, double rel_tol = 1e-13) const;

 private:
  double mu_;
  PeriodicPotential1D V_;
  bool free_;
  double max_V_ = 0.0;
  std::vector<double> wells_;
  double sep_const_ = 0.0;
};

// Full-period integrals of the rotating branch. All raise DomainError for E <= 0.
double action(const MechanicalSystem1D& sys, double E);
double period(const MechanicalSystem1D& sys, double E);
double frequency(const MechanicalSystem1D& sys, double E);
// Inverse of action(sys, .); DomainError for I <= separatrix action.
double energy_of_action(const MechanicalSystem1D& sys, double I);
// Inverse of frequency(sys, .); DomainError for omega <= 0.
double energy_of_frequency(const MechanicalSystem1D& sys, double omega);

enum class Branch { Plus, Minus };

// Angle chart x -> theta of the rotating torus at energy E, tabulated on a
// uniform grid of cells with exact per-cell Gauss–Legendre increments. For the
// Minus branch theta_-(x) = -theta_+(x) mod 1.
class ActionAngleChart {
 public:
  struct Sample {
    double x, theta, dtheta_dx;
  };

  ActionAngleChart(const MechanicalSystem1D& sys, double E, Branch branch = Branch::Plus,
                   int cells = 4096);

  const MechanicalSystem1D& system() const { return sys_; }
  double energy() const { return E_; }
  Branch branch() const { return branch_; }
  double action() const { return I_; }
  double frequency() const { return omega_; }

  // x is reduced mod 1; the result lies in [0,1).
  double angle_of_position(double x) const;
  double angle_derivative(double x) const;
  // theta is reduced mod 1; the result lies in [0,1).
  double position_of_angle(double theta) const;
  // x(offset + j/n) for j = 0..n-1.
  std::vector<double> positions_on_grid(std::size_t n, double offset = 0.0) const;

  // Table nodes x_j = j / cells, j = 0..cells, for the chart's branch.
  std::vector<Sample> samples() const;

 private:
  double plus_angle(double x) const;  // x in [0,1]
  double plus_position(double theta) const;  // theta in [0,1)
  double weight(double x) const;

  MechanicalSystem1D sys_;
  double E_;
  Branch branch_;
  int cells_;
  double I_ = 0.0, omega_ = 0.0;
  double Z_ = 1.0;  // integral of the angle weight over one period
  std::vector<double> table_;  // theta_+ at x_j, normalized to table_[cells] = 1
};

// sup |theta_+(x) - x| + sup |theta_+'(x) - 1| over the chart table.
double perturbation_gap(const ActionAngleChart& chart);

// Position on the rotating torus of energy E at angle theta without a full-size table.
double position_at_energy(const MechanicalSystem1D& sys, double E, double theta);

// CSV with header x,theta,dtheta_dx.
void write_chart_csv(const ActionAngleChart& chart, std::ostream& os);

}  // namespace rigidity

#include "rigidity/quadrature.hpp"

namespace rigidity {

template <class F>
double MechanicalSystem1D::period_integral(F&& f, double ratio, double rel_tol) const {
  if (free_) return f(0.0);
  if (ratio >= 1e-4) {
    const auto r = quad::periodic_integral(f, rel_tol);
    if (r.converged) return r.value;
  }
  double total = 0.0;
  const std::size_t n = wells_.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double a = wells_[j];
    const double b = (j + 1 < n) ? wells_[j + 1] : wells_[0] + 1.0;
    total += quad::integrate_tanh_sinh(f, a, b);
  }
  return total;
}

}  // namespace rigidity
