#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rigidity::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss–Legendre rule with n points; rules are computed once and cached.
const Rule& gauss_legendre(int n);

template <class F>
double integrate_gl(F&& f, double a, double b, int n = 32) {
  const Rule& r = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

namespace detail {
template <class F>
double adaptive_step(F& f, double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = integrate_gl(f, a, m, 24), right = integrate_gl(f, m, b, 24);
  const double refined = left + right;
  const double diff = std::abs(refined - whole);
  if (depth <= 0 || diff <= tol || diff <= 1e-14 * std::abs(refined)) return refined;
  return adaptive_step(f, a, m, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive bisection with a 24-point Gauss–Legendre panel. tol is absolute.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-13, int max_depth = 30) {
  if (a == b) return 0.0;
  const double whole = integrate_gl(f, a, b, 24);
  return detail::adaptive_step(f, a, b, whole, tol, max_depth);
}

// Double-exponential rule; robust for integrands with endpoint (near-)singularities.
template <class F>
double integrate_tanh_sinh(F&& f, double a, double b, double tol = 1e-15) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  if (a == b) return 0.0;
  return rule.integrate([&f](double x) { return f(x); }, a, b, tol);
}

// Mean of f over [0,1) using n equispaced nodes.
template <class F>
double periodic_trapezoid(F&& f, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += f(static_cast<double>(j) / static_cast<double>(n));
  return s / static_cast<double>(n);
}

struct PeriodicResult {
  double value = 0.0;
  double error = 0.0;  // difference between the last two refinements
  std::size_t nodes = 0;
  bool converged = false;
};

// Trapezoid over one period starting at n0 nodes and doubling; each doubling
// only evaluates the new midpoints.
template <class F>
PeriodicResult periodic_integral(F&& f, double rel_tol, std::size_t n0 = 2048,
                                 std::size_t n_max = std::size_t{1} << 16) {
  PeriodicResult r;
  std::size_t n = n0;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += f(static_cast<double>(j) / static_cast<double>(n));
  double prev = sum / static_cast<double>(n);
  while (n < n_max) {
    double mid = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      mid += f((static_cast<double>(j) + 0.5) / static_cast<double>(n));
    sum += mid;
    n *= 2;
    const double cur = sum / static_cast<double>(n);
    r.error = std::abs(cur - prev);
    prev = cur;
    if (r.error <= rel_tol * std::max(1.0, std::abs(cur))) {
      r.converged = true;
      break;
    }
  }
  r.value = prev;
  r.nodes = n;
  return r;
}

// Golden-section search for a local minimum of f on [a, b].
template <class F>
double golden_section_min(F&& f, double a, double b, double tol = 1e-14) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace rigidity::quad
