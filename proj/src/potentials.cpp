#include "rigidity/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "rigidity/errors.hpp"
#include "rigidity/quadrature.hpp"

namespace rigidity {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPairTol = 1e-12;

double frac(double t) { return t - std::floor(t); }

// Completes a coefficient map by conjugation and validates consistency.
template <class Key, class Neg>
std::map<Key, cplx> hermitian_complete(std::map<Key, cplx> in, const Key& zero, Neg neg) {
  std::map<Key, cplx> out;
  for (const auto& [k, c] : in) {
    if (k == zero) {
      if (std::abs(c.imag()) > kPairTol * std::max(1.0, std::abs(c)))
        throw DomainError("mean coefficient must be real");
      if (c.real() != 0.0) out[k] = cplx(c.real(), 0.0);
      continue;
    }
    const Key nk = neg(k);
    auto it = in.find(nk);
    if (it != in.end() && std::abs(it->second - std::conj(c)) > kPairTol * std::max(1.0, std::abs(c)))
      throw DomainError("coefficients at k and -k are not complex conjugates");
    if (c == cplx(0.0, 0.0) && (it == in.end() || it->second == cplx(0.0, 0.0))) continue;
    // Use the representative's value for both members so storage is exactly symmetric.
    const bool rep = k > nk;
    const cplx v = rep ? c : (it != in.end() ? std::conj(it->second) : c);
    out[k] = v;
    out[nk] = std::conj(v);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PeriodicPotential1D

PeriodicPotential1D::PeriodicPotential1D(std::map<int, cplx> coefficients)
    : coeffs_(hermitian_complete(std::move(coefficients), 0, [](int k) { return -k; })) {
  for (const auto& [k, c] : coeffs_) {
    if (k > 0) {
      terms_.push_back({k, c.real(), c.imag()});
      max_freq_ = std::max(max_freq_, k);
    }
  }
  v0_ = coefficient(0).real();
}

PeriodicPotential1D PeriodicPotential1D::pendulum() {
  return PeriodicPotential1D({{0, 1.0}, {1, -0.5}, {-1, -0.5}});
}

PeriodicPotential1D PeriodicPotential1D::constant(double value) {
  return PeriodicPotential1D({{0, value}});
}

PeriodicPotential1D PeriodicPotential1D::cosine(int k, double amplitude) {
  if (k == 0) return constant(amplitude);
  return PeriodicPotential1D({{k, 0.5 * amplitude}, {-k, 0.5 * amplitude}});
}

double PeriodicPotential1D::operator()(double x) const {
  double s = 0.0;
  for (const Term& t : terms_) {
    const double ph = kTwoPi * frac(t.k * x);
    s += t.re * std::cos(ph) - t.im * std::sin(ph);
  }
  return v0_ + 2.0 * s;
}

double PeriodicPotential1D::derivative(double x) const {
  double s = 0.0;
  for (const Term& t : terms_) {
    const double ph = kTwoPi * frac(t.k * x);
    s += kTwoPi * t.k * (-t.re * std::sin(ph) - t.im * std::cos(ph));
  }
  return 2.0 * s;
}

double PeriodicPotential1D::second_derivative(double x) const {
  double s = 0.0;
  for (const Term& t : terms_) {
    const double ph = kTwoPi * frac(t.k * x);
    const double w = kTwoPi * t.k;
    s -= w * w * (t.re * std::cos(ph) - t.im * std::sin(ph));
  }
  return 2.0 * s;
}

cplx PeriodicPotential1D::eval_complex(double x) const {
  cplx s = 0.0;
  for (const auto& [k, c] : coeffs_) s += c * std::polar(1.0, kTwoPi * frac(k * x));
  return s;
}

cplx PeriodicPotential1D::coefficient(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx(0.0, 0.0) : it->second;
}

namespace {

template <class F>
double grid_argmin(F&& f) {
  constexpr int n = 4096;
  int best = 0;
  double fb = f(0.0);
  for (int j = 1; j < n; ++j) {
    const double v = f(static_cast<double>(j) / n);
    if (v < fb) {
      fb = v;
      best = j;
    }
  }
  const double h = 1.0 / n;
  const double x = quad::golden_section_min(f, (best - 1) * h, (best + 1) * h);
  return frac(x);
}

}  // namespace

double PeriodicPotential1D::argmin() const {
  if (is_constant()) return 0.0;
  return grid_argmin([this](double x) { return (*this)(x); });
}

double PeriodicPotential1D::min_value() const {
  if (is_constant()) return v0_;
  const double x = argmin();
  double m = (*this)(x);
  // Newton polish on V' for Morse minima; keeps the result if it improves.
  double y = x;
  for (int it = 0; it < 5; ++it) {
    const double d2 = second_derivative(y);
    if (d2 <= 0.0) break;
    y -= derivative(y) / d2;
  }
  return std::min(m, (*this)(y));
}

double PeriodicPotential1D::max_value() const {
  if (is_constant()) return v0_;
  const double x = grid_argmin([this](double t) { return -(*this)(t); });
  return (*this)(x);
}

double PeriodicPotential1D::sup_norm() const {
  return std::max(std::abs(min_value()), std::abs(max_value()));
}

PeriodicPotential1D PeriodicPotential1D::shifted(double c) const {
  auto m = coeffs_;
  m[0] += c;
  return PeriodicPotential1D(m);
}

PeriodicPotential1D PeriodicPotential1D::scaled(double s) const {
  auto m = coeffs_;
  for (auto& [k, c] : m) c *= s;
  return PeriodicPotential1D(m);
}

PeriodicPotential1D normalize_min_zero(const PeriodicPotential1D& V) {
  const double m = V.min_value();
  if (m == 0.0) return V;
  return V.shifted(-m);
}

// ---------------------------------------------------------------------------
// TorusPotential

TorusPotential::TorusPotential(int dimension) : d_(dimension) {
  if (d_ < 1) throw DomainError("torus dimension must be positive");
}

TorusPotential::TorusPotential(int dimension, std::map<Mode, cplx> coefficients)
    : d_(dimension) {
  if (d_ < 1) throw DomainError("torus dimension must be positive");
  for (const auto& [k, c] : coefficients) check_mode(k);
  coeffs_ = hermitian_complete(std::move(coefficients), Mode(d_, 0),
                               [](const Mode& k) { return negated(k); });
}

void TorusPotential::check_mode(const Mode& k) const {
  if (static_cast<int>(k.size()) != d_)
    throw DomainError("mode " + to_string(k) + " does not match dimension " + std::to_string(d_));
}

TorusPotential TorusPotential::trig(int dimension, const Mode& k, double a, double b) {
  TorusPotential U(dimension);
  U.check_mode(k);
  if (is_zero(k)) {
    U.set(k, a);
  } else {
    // a cos + b sin = Re((a - i b) e^{i phi}) = c e^{i phi} + conj(c) e^{-i phi}, c = (a - i b)/2
    U.set(k, cplx(0.5 * a, -0.5 * b));
  }
  return U;
}

TorusPotential TorusPotential::constant(int dimension, double value) {
  return trig(dimension, Mode(dimension, 0), value);
}

cplx TorusPotential::coefficient(const Mode& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx(0.0, 0.0) : it->second;
}

cplx TorusPotential::eval_complex(std::span<const double> x) const {
  cplx s = 0.0;
  for (const auto& [k, c] : coeffs_) s += c * std::polar(1.0, kTwoPi * frac(dot(k, x)));
  return s;
}

double TorusPotential::value(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) {
    const double ph = kTwoPi * frac(dot(k, x));
    s += c.real() * std::cos(ph) - c.imag() * std::sin(ph);
  }
  return s;
}

std::vector<double> TorusPotential::gradient(std::span<const double> x) const {
  std::vector<double> g(d_, 0.0);
  for (const auto& [k, c] : coeffs_) {
    const double ph = kTwoPi * frac(dot(k, x));
    const double dv = -c.real() * std::sin(ph) - c.imag() * std::cos(ph);
    for (int i = 0; i < d_; ++i) g[i] += kTwoPi * k[i] * dv;
  }
  return g;
}

double TorusPotential::l1_norm() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) s += std::abs(c);
  return s;
}

void TorusPotential::set(const Mode& k, cplx amplitude) {
  check_mode(k);
  const Mode nk = negated(k);
  if (is_zero(k)) {
    if (std::abs(amplitude.imag()) > kPairTol) throw DomainError("mean coefficient must be real");
    amplitude = amplitude.real();
  }
  if (amplitude == cplx(0.0, 0.0)) {
    coeffs_.erase(k);
    coeffs_.erase(nk);
    return;
  }
  coeffs_[k] = amplitude;
  coeffs_[nk] = std::conj(amplitude);
}

TorusPotential TorusPotential::without_modes(const std::set<Mode>& modes) const {
  TorusPotential out = *this;
  for (const Mode& k : modes) {
    out.coeffs_.erase(k);
    out.coeffs_.erase(negated(k));
  }
  return out;
}

TorusPotential TorusPotential::scaled(double s) const {
  TorusPotential out(d_);
  if (s == 0.0) return out;
  out.coeffs_ = coeffs_;
  for (auto& [k, c] : out.coeffs_) c *= s;
  return out;
}

TorusPotential TorusPotential::operator+(const TorusPotential& o) const {
  if (o.d_ != d_) throw DomainError("dimension mismatch in potential sum");
  TorusPotential out = *this;
  for (const auto& [k, c] : o.coeffs_) {
    const cplx v = out.coefficient(k) + c;
    if (v == cplx(0.0, 0.0))
      out.coeffs_.erase(k);
    else
      out.coeffs_[k] = v;
  }
  return out;
}

TorusPotential TorusPotential::operator-(const TorusPotential& o) const { return *this + o.scaled(-1.0); }

// ---------------------------------------------------------------------------
// Spectral combinatorics

namespace {

struct Candidate {
  int sup, l1;
  Mode b;
  bool operator<(const Candidate& o) const {
    if (sup != o.sup) return sup < o.sup;
    if (l1 != o.l1) return l1 < o.l1;
    return b < o.b;
  }
};

}  // namespace

std::vector<ResonanceVector> orthogonal_pair(const Mode& k, int search_bound) {
  const int d = static_cast<int>(k.size());
  if (nonzero_count(k) < 2) return {};
  if (d == 2) {
    Mode b = primitive(Mode{k[1], -k[0]});
    if (!is_representative(b)) b = negated(b);
    return {ResonanceVector(b), ResonanceVector(negated(b))};
  }
  // Solve for the component j where k is nonzero; enumerate the others.
  int j = 0;
  while (k[j] == 0) ++j;
  const int B = search_bound;
  bool found = false;
  Candidate best{};
  Mode free(d, -B);
  Mode b(d, 0);
  while (true) {
    long s = 0;
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      if (free[i] == 0) {
        ok = false;
        break;
      }
      s += static_cast<long>(k[i]) * free[i];
    }
    if (ok && s % k[j] == 0) {
      const long bj = -s / k[j];
      if (bj != 0 && std::labs(bj) <= B) {
        for (int i = 0; i < d; ++i) b[i] = (i == j) ? static_cast<int>(bj) : free[i];
        if (is_representative(b) && is_coprime(b)) {
          int sup = 0, l1 = 0;
          for (int c : b) {
            sup = std::max(sup, std::abs(c));
            l1 += std::abs(c);
          }
          Candidate cand{sup, l1, b};
          if (!found || cand < best) {
            best = cand;
            found = true;
          }
        }
      }
    }
    // odometer over free components
    int i = 0;
    for (; i < d; ++i) {
      if (i == j) continue;
      if (++free[i] <= B) break;
      free[i] = -B;
    }
    if (i == d) break;
  }
  if (!found)
    throw DomainError("no coprime all-nonzero vector orthogonal to " + to_string(k) +
                      " within search bound " + std::to_string(search_bound));
  return {ResonanceVector(best.b), ResonanceVector(negated(best.b))};
}

SpectrumSets spectrum_sets(const TorusPotential& U, double amplitude_tol, int search_bound) {
  if (amplitude_tol < 0.0) throw DomainError("amplitude_tol must be nonnegative");
  SpectrumSets s;
  for (const auto& [k, c] : U.coefficients()) {
    if (std::abs(c) <= amplitude_tol) continue;
    s.spectrum.insert(k);
    if (nonzero_count(k) >= 2) s.nonsingular.insert(k);
  }
  std::set<Mode> done;
  for (const Mode& k : s.nonsingular) {
    const Mode rep = is_representative(k) ? k : negated(k);
    if (!done.insert(rep).second) continue;
    for (auto& b : orthogonal_pair(rep, search_bound)) s.coprime_orthogonal.insert(b);
  }
  return s;
}

TorusPotential separable_part(const TorusPotential& U) {
  std::map<Mode, cplx> keep;
  for (const auto& [k, c] : U.coefficients())
    if (nonzero_count(k) <= 1) keep[k] = c;
  return TorusPotential(U.dimension(), keep);
}

int degree(const TorusPotential& U, int axis) {
  if (axis < 0 || axis >= U.dimension()) throw DomainError("axis index out of range");
  int m = 0;
  for (const auto& [k, c] : U.coefficients()) m = std::max(m, std::abs(k[axis]));
  return m;
}

}  // namespace rigidity
