#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidity/action_angle.hpp"
#include "rigidity/lattice.hpp"
#include "rigidity/potentials.hpp"

namespace rigidity {

struct TorusOptions {
  // Required clearance gamma of |c_i| above the flat region; default 0.05 sqrt(2e).
  std::optional<double> margin;
  int chart_cells = 4096;
};

double default_margin(double e);

// Rational invariant torus of H0 on the energy surface {H0 = e} whose rotation
// vector is a positive multiple of b. Positions use the + chart of every axis
// with the signed angle advance theta0_i + b_i t.
struct ResonantTorus {
  ResonanceVector b;
  double e = 0.0;
  double margin = 0.0;
  std::vector<double> energies;  // e^(i), summing to e
  std::vector<double> c;         // sign(b_i) * action
  std::vector<double> omega;     // sign(b_i) * frequency
  std::vector<ActionAngleChart> charts;

  std::size_t dimension() const { return c.size(); }
  // x^i(theta0_i + b_i t) for every axis.
  std::vector<double> position(std::span<const double> theta0, double t) const;
};

// Raises InfeasibleResonance when some |c_i| does not clear its flat region by
// the margin, DomainError for e <= 0 or a dimension mismatch.
ResonantTorus resonant_torus(std::span<const MechanicalSystem1D> systems, double e,
                             const ResonanceVector& b, const TorusOptions& options = {});

struct AverageOptions {
  std::size_t nodes_per_unit = 1024;  // initial nodes = nodes_per_unit * max |b_i|
  double tol = 1e-10;                 // absolute change between doublings
  std::size_t max_nodes = std::size_t{1} << 22;
};

// Time average over one resonance period of U along the orbit through theta0.
double average_along_torus(const TorusPotential& U, const ResonantTorus& torus,
                           std::span<const double> theta0, const AverageOptions& options = {});

// Same for the single mode e^{2 pi i k.x}.
cplx average_mode(const ResonantTorus& torus, const Mode& k, std::span<const double> theta0,
                  const AverageOptions& options = {});

// Averages of several modes over all orbits through the grid
// theta0 = offset + a / n, a in {0..n-1}^d. Values are stored row-major with the
// first axis slowest. Orbits that differ by a grid shift along b share a value.
struct GridAverages {
  std::size_t n = 0;
  std::vector<double> offset;
  std::size_t nodes = 0;
  double last_change = 0.0;  // max change at the final doubling
  std::map<Mode, std::vector<cplx>> values;

  std::vector<double> grid_point(std::size_t flat_index) const;
};

GridAverages average_modes_on_grid(const ResonantTorus& torus, const std::vector<Mode>& modes,
                                   std::size_t n, std::span<const double> offset = {},
                                   const AverageOptions& options = {});

// Integral of e^{2 pi i k x^i(theta)} over one angle period of axis i.
cplx angle_moment(const ActionAngleChart& chart, int k, double tol = 1e-13);

// Mean of U pulled back to the angle variables of the torus; equals the mean over
// theta0 of average_along_torus and reduces to [U]_0 when all mu_i = 0.
double angle_mean(const TorusPotential& U, const ResonantTorus& torus);

// {k in S_{U,0} : k.b = 0}.
std::set<Mode> annihilation_flags(const TorusPotential& U, const ResonanceVector& b,
                                  double amplitude_tol = 0.0);

struct SeparabilityOptions {
  std::size_t grid_n = 32;
  double residual_tol = 1e-8;
  double amplitude_tol = 0.0;
  TorusOptions torus;
  AverageOptions average;
  unsigned threads = 0;
  // Random grid offset in [0, 1/n)^d per resonance when set.
  std::optional<std::uint64_t> seed;
};

struct ResonanceRecord {
  ResonanceVector b{Mode{1}};
  bool feasible = false;
  std::string reason;  // diagnostic for infeasible resonances
  std::vector<double> energies, c, omega;
  double max_residual = 0.0;
  std::set<Mode> annihilated;
  std::set<Mode> flagged_modes;
  std::map<Mode, double> mode_residuals;  // per Hermitian pair, keyed by both members
  std::size_t nodes = 0;
};

struct SeparabilityReport {
  std::set<Mode> nonsingular;
  std::vector<ResonanceRecord> records;
  std::set<Mode> obstructions;  // union of flagged modes
  std::set<Mode> untested;      // nonsingular modes annihilated by no feasible resonance
  std::string verdict;          // separable-consistent | obstruction | inconclusive
  std::size_t grid_n = 0;
  double residual_tol = 0.0;
};

// For every b in the coprime orthogonal set of U: builds the resonant torus at
// energy e and evaluates the averaged non-separable part of U minus its angle
// mean on the theta0 grid. Infeasible resonances are recorded and skipped.
SeparabilityReport separability_test(const TorusPotential& U,
                                     std::span<const MechanicalSystem1D> systems, double e,
                                     const SeparabilityOptions& options = {});

nlohmann::json to_json(const SeparabilityReport& report);
nlohmann::json mode_to_json(const Mode& k);

}  // namespace rigidity
