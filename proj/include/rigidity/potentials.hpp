#pragma once

#include <complex>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "rigidity/lattice.hpp"

namespace rigidity {

using cplx = std::complex<double>;

// Real function on the circle R/Z given by a finite Fourier series
// V(x) = sum_k v_k e^{2 pi i k x}, stored with v_{-k} = conj(v_k).
class PeriodicPotential1D {
 public:
  PeriodicPotential1D() = default;
  // Missing partners -k are filled in by conjugation. Inconsistent pairs or a
  // complex mean raise DomainError.
  explicit PeriodicPotential1D(std::map<int, cplx> coefficients);

  static PeriodicPotential1D pendulum();  // 1 - cos(2 pi x)
  static PeriodicPotential1D constant(double value);
  static PeriodicPotential1D cosine(int k, double amplitude);  // amplitude * cos(2 pi k x)

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  cplx eval_complex(double x) const;

  cplx coefficient(int k) const;
  const std::map<int, cplx>& coefficients() const { return coeffs_; }
  int max_frequency() const { return max_freq_; }
  bool is_constant() const { return max_freq_ == 0; }
  double mean() const { return coefficient(0).real(); }

  // Extrema over [0,1): 4096-point grid refined by golden section.
  double min_value() const;
  double max_value() const;
  double argmin() const;
  // sup |V|, the C^0 norm.
  double sup_norm() const;

  PeriodicPotential1D shifted(double c) const;
  PeriodicPotential1D scaled(double s) const;

 private:
  struct Term {
    int k;
    double re, im;  // coefficient of k > 0
  };
  std::map<int, cplx> coeffs_;
  std::vector<Term> terms_;
  double v0_ = 0.0;
  int max_freq_ = 0;
};

// Shift V by a constant so that its minimum over the circle is 0.
PeriodicPotential1D normalize_min_zero(const PeriodicPotential1D& V);

// Real function on T^d with a sparse Hermitian-symmetric coefficient map.
class TorusPotential {
 public:
  explicit TorusPotential(int dimension = 2);
  TorusPotential(int dimension, std::map<Mode, cplx> coefficients);

  // a * cos(2 pi k.x) + b * sin(2 pi k.x)
  static TorusPotential trig(int dimension, const Mode& k, double a, double b = 0.0);
  static TorusPotential constant(int dimension, double value);

  int dimension() const { return d_; }
  const std::map<Mode, cplx>& coefficients() const { return coeffs_; }
  cplx coefficient(const Mode& k) const;
  bool empty() const { return coeffs_.empty(); }
  double mean() const { return coefficient(Mode(d_, 0)).real(); }

  double value(std::span<const double> x) const;
  cplx eval_complex(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
  // Sum of |U_k|, an upper bound for the sup norm.
  double l1_norm() const;

  // Sets U_k (and U_{-k} by conjugation); a zero amplitude removes the pair.
  void set(const Mode& k, cplx amplitude);
  TorusPotential without_modes(const std::set<Mode>& modes) const;
  TorusPotential scaled(double s) const;

  TorusPotential operator+(const TorusPotential& o) const;
  TorusPotential operator-(const TorusPotential& o) const;

 private:
  void check_mode(const Mode& k) const;
  int d_;
  std::map<Mode, cplx> coeffs_;
};

struct SpectrumSets {
  std::set<Mode> spectrum;
  std::set<Mode> nonsingular;
  std::set<ResonanceVector> coprime_orthogonal;
};

// For d = 2 the orthogonal set is exactly {+-(k2,-k1)/gcd}. For d >= 3 each
// nonsingular k contributes the smallest +-pair (by max norm, then l1 norm, then
// lexicographic order) of coprime all-nonzero b with b.k = 0 and
// |b|_inf <= search_bound; DomainError if none exists.
SpectrumSets spectrum_sets(const TorusPotential& U, double amplitude_tol = 0.0,
                           int search_bound = 50);

// Smallest +-pair of coprime all-nonzero vectors orthogonal to k (see above).
std::vector<ResonanceVector> orthogonal_pair(const Mode& k, int search_bound = 50);

// Keeps the mean and the single-axis modes.
TorusPotential separable_part(const TorusPotential& U);

// max |k_axis| over the spectrum (axis is 0-based).
int degree(const TorusPotential& U, int axis);

}  // namespace rigidity
