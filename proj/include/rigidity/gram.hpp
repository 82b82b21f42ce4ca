#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidity/averaging.hpp"

namespace rigidity {

// integral over one period of prod_i e^{2 pi i k_i x^i(theta0_i + b_i t)}.
cplx mode_function(const ResonantTorus& torus, const Mode& k, std::span<const double> theta0,
                   const AverageOptions& options = {});

enum class GramMethod {
  Spectral,    // exact t-integration through the Fourier coefficients of each chart
  Quadrature,  // trapezoid in t and over a theta0 tensor grid
};

struct GramOptions {
  // Fixes k_1 and builds the one-variable family in theta0^2 (axis 1 must be free).
  std::optional<int> fixed_k1;
  double rank_tol = 1e-8;
  GramMethod method = GramMethod::Spectral;
  TorusOptions torus;
  unsigned threads = 0;
  double spectral_tol = 1e-14;
  double quadrature_tol = 1e-9;  // theta0 grid doubling target for the quadrature method
};

struct GramResonance {
  ResonanceVector b{Mode{1}};
  bool feasible = false;
  std::string reason;
  std::vector<double> c, omega;
};

struct GramReport {
  std::vector<int> axis_degrees;
  std::vector<double> mu;
  std::optional<int> fixed_k1;
  std::vector<Mode> indices;  // rows/columns; (k1, k2) tuples
  Eigen::MatrixXcd matrix;
  std::vector<GramResonance> resonances;
  std::complex<double> det = 0.0;
  Eigen::VectorXd singular_values;
  double min_singular_value = 0.0;
  double max_singular_value = 0.0;
  double min_eigenvalue = 0.0;
  bool full_rank = false;
  double rank_tol = 0.0;
  double quadrature_error_estimate = 0.0;
};

// Resonances summed in the mode family of a degree box: {+-(k2, -k1)/gcd} over the
// box, restricted to the given k1 when fixed.
std::vector<ResonanceVector> gram_resonances(std::span<const int> degrees,
                                             std::optional<int> fixed_k1);

// Gram matrix of the summed mode functions at energy e. Requires d = 2 and
// degrees >= 1; raises DomainError when every resonance is infeasible.
GramReport gram_matrix(std::span<const int> degrees, std::span<const MechanicalSystem1D> systems,
                       double e, const GramOptions& options = {});

// SVD of the matrix: records singular values, det and the minimal eigenvalue, and
// sets full_rank = (sigma_min > rank_tol * sigma_max).
bool full_rank_certificate(GramReport& report, double rank_tol);

struct SweepRow {
  std::vector<double> mu;
  std::complex<double> det = 0.0;
  double sigma_min = 0.0;
  bool full_rank = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<int> varying_axes;
  // Consecutive row pairs (i, i+1) where Re det G changes sign or sigma_min dips
  // below the threshold: brackets for members of the exceptional set.
  std::vector<std::pair<std::size_t, std::size_t>> candidate_brackets;
  double sigma_threshold = 2.0;
  // Largest mu of the leading run of rows with sigma_min > sigma_threshold.
  std::optional<double> measured_threshold;
};

// Gram certificates along a grid of coupling vectors; the potentials are fixed and
// mu_i = 0 selects the free rotor on axis i.
SweepResult mu_sweep(std::span<const int> degrees, std::span<const PeriodicPotential1D> potentials,
                     double e, const std::vector<std::vector<double>>& mu_grid,
                     const GramOptions& options = {}, double sigma_threshold = 2.0);

// Header "mu" when one axis varies, "mu1,mu2,..." otherwise, followed by
// detG_re,detG_im,sigma_min,full_rank.
void write_sweep_csv(const SweepResult& sweep, std::ostream& os);

nlohmann::json to_json(const GramReport& report);
nlohmann::json to_json(const SweepResult& sweep);

}  // namespace rigidity
