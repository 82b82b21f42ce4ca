#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rigidity/action_angle.hpp"
#include "rigidity/potentials.hpp"

namespace rigidity {

struct PhaseState {
  std::vector<double> x;  // wrapped into [0,1)
  std::vector<double> p;
};

// H = sum p_i^2/2 - sum mu_i V_i(x^i) + eps U(x).
double hamiltonian(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                   double epsilon, const PhaseState& s);

// p_1^2/2 - mu_1 V_1(x^1).
double first_integral_F1(const PhaseState& s, const MechanicalSystem1D& sys1);

// F1 + eps U_1(x^1), where U_1 collects the modes of U supported on axis 1;
// conserved when U is separable.
double corrected_first_integral(const PhaseState& s, const MechanicalSystem1D& sys1,
                                const TorusPotential& U, double epsilon);

enum class Integrator {
  Verlet,    // kick-drift-kick, order 2
  Yoshida4,  // triple-jump composition of Verlet, order 4
};

struct FlowOptions {
  Integrator method = Integrator::Verlet;
  std::size_t record_stride = 1;
};

struct TrajectoryRecord {
  double h = 0.0;
  std::size_t stride = 1;
  std::vector<double> t;
  std::vector<std::vector<double>> x, lift, p;
  std::vector<double> H, F1;

  std::size_t size() const { return t.size(); }
  PhaseState state(std::size_t j) const { return {x[j], p[j]}; }
};

// Fixed-step symplectic integration over ceil(T/h) steps. The lift is the
// unwrapped position; each step must satisfy h max|p| < 0.4 (DomainError otherwise).
TrajectoryRecord integrate(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                           double epsilon, const PhaseState& s0, double h, double T,
                           const FlowOptions& options = {});

// Independent trajectories integrated in parallel; results are in input order.
std::vector<TrajectoryRecord> integrate_batch(std::span<const MechanicalSystem1D> systems,
                                              const TorusPotential& U, double epsilon,
                                              std::span<const PhaseState> initial, double h,
                                              double T, const FlowOptions& options = {},
                                              unsigned threads = 0);

// (lift(T) - lift(0)) / T.
std::vector<double> rotation_vector_estimate(const TrajectoryRecord& traj);

// e + sum mu_i V_i(x^i).
double maupertuis_factor(std::span<const MechanicalSystem1D> systems, double e,
                         std::span<const double> x);
// e + sum mu_i V_i(x^i) - eps U(x).
double maupertuis_factor(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                         double epsilon, double e, std::span<const double> x);

enum class LevelSet { Torus, Annulus1, Annulus2, Singular };
std::string to_string(LevelSet kind);

// Topology of {H = e, F1 = f} for d = 2; boundary values within tol are singular.
LevelSet classify_level_set(double e, double f, std::span<const MechanicalSystem1D> systems,
                            double tol = 1e-12);

// Sup over every `every`-th interior record of the component of the covariant
// acceleration D_t x' (metric (e - W) dx^2, W the potential energy) orthogonal to
// x'. Velocity and acceleration are central differences of the recorded lift.
double geodesic_residual(const TrajectoryRecord& traj, std::span<const MechanicalSystem1D> systems,
                         const TorusPotential& U, double epsilon, double e,
                         std::size_t every = 100);

// Columns t, x1..xd, lift1..liftd, p1..pd, H, F1.
void write_trajectory_csv(const TrajectoryRecord& traj, std::ostream& os);

}  // namespace rigidity
