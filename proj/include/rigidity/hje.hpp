#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <json.hpp>

#include "rigidity/action_angle.hpp"
#include "rigidity/potentials.hpp"

namespace rigidity {

// The k = 0 Fourier coefficient of U, i.e. its integral over the torus.
double mean_value(const TorusPotential& U);

// Fourier solution u1 of <omega, grad u1> + U = [U]_0 on the modes with
// |k.omega| > resonance_tol; the remaining modes are obstructions.
struct FirstOrderSolution {
  std::vector<double> omega;
  std::map<Mode, cplx> u1;
  double alpha1 = 0.0;
  std::set<Mode> resonant_obstructions;
  double resonance_tol = 0.0;
  double max_coefficient = 0.0;  // max |u1_k|, the small-divisor size

  double value(std::span<const double> theta) const;
  std::vector<double> gradient(std::span<const double> theta) const;
};

// Default resonance_tol is 1e-9 * |omega|.
FirstOrderSolution solve_first_order(const TorusPotential& U, std::span<const double> omega,
                                     std::optional<double> resonance_tol = std::nullopt);

// sup over an n^d grid of |<omega, grad u1> + U - alpha1|, with the obstructed
// modes removed from U.
double transport_residual(const FirstOrderSolution& sol, const TorusPotential& U,
                          std::size_t grid_n);

// U(x^1(theta^1), ..., x^d(theta^d)) as a Fourier series in the chart angles.
// The tensor grid doubles from 32 per axis until the coefficients change by at
// most tol; coefficients below drop_tol are discarded.
TorusPotential pull_back(const TorusPotential& U, std::span<const ActionAngleChart> charts,
                         double tol = 1e-13, double drop_tol = 1e-15);

// u_eps = eps u1 in the angle variables of the invariant tori with cohomology c;
// alpha_eps = alpha_sum(c) + eps [U~]_0 with U~ the pulled-back potential.
struct LindstedtSolution {
  std::vector<MechanicalSystem1D> systems;
  TorusPotential U;
  std::vector<double> c, energies, omega;
  double epsilon = 0.0;
  double alpha0 = 0.0;
  double alpha_eps = 0.0;
  TorusPotential pulled_back;
  FirstOrderSolution first_order;
};

// DomainError if some |c_i| lies in its flat region. Obstructions are reported in
// first_order.resonant_obstructions.
LindstedtSolution lindstedt_first_order(std::span<const MechanicalSystem1D> systems,
                                        const TorusPotential& U, std::span<const double> c,
                                        double epsilon);

// sup over an n^d angle grid of |H_eps(theta, c + grad u_eps) - alpha_eps|, with
// H_eps(theta, I) = sum_i h_i(I_i) + eps U(x(theta, I)).
double lindstedt_defect(const LindstedtSolution& sol, std::size_t grid_n = 16);

nlohmann::json to_json(const FirstOrderSolution& sol);

}  // namespace rigidity
