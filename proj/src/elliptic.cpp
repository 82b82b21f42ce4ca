#include "rigidity/elliptic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rigidity/errors.hpp"

namespace rigidity {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPio2 = 0.5 * std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_parameter(double m) {
  if (!(m >= 0.0 && m < 1.0))
    throw DomainError("elliptic parameter m = " + std::to_string(m) + " outside [0, 1)");
}

// Descending Landen/Gauss transformation with amplitude tracking; phi assumed
// already reduced to |phi| <= pi/2 apart from the large-tangent branch.
double ellik_reduced(double phi, double m, double K) {
  const double a0 = 1.0 - m;
  bool negative = false;
  if (phi < 0.0) {
    phi = -phi;
    negative = true;
  }
  double b = std::sqrt(a0);
  double t = std::tan(phi);
  if (std::abs(t) > 10.0) {
    // Complementary amplitude: F(phi) = K - F(atan(1/(b t))).
    const double e = 1.0 / (b * t);
    if (std::abs(e) < 10.0) {
      const double r = K - ellik_reduced(std::atan(e), m, K);
      return negative ? -r : r;
    }
  }
  double a = 1.0;
  double c = std::sqrt(m);
  double d = 1.0;
  long mod = 0;
  int guard = 0;
  while (std::abs(c / a) > kEps && guard++ < 64) {
    const double r = b / a;
    phi = phi + std::atan(t * r) + static_cast<double>(mod) * kPi;
    const double denom = 1.0 - r * t * t;
    if (std::abs(denom) > 10.0 * kEps) {
      t = t * (1.0 + r) / denom;
      mod = static_cast<long>((phi + kPio2) / kPi);
    } else {
      t = std::tan(phi);
      mod = static_cast<long>(std::floor((phi - std::atan(t)) / kPi));
    }
    c = 0.5 * (a - b);
    const double g = std::sqrt(a * b);
    a = 0.5 * (a + b);
    b = g;
    d += d;
  }
  const double r = (std::atan(t) + static_cast<double>(mod) * kPi) / (d * a);
  return negative ? -r : r;
}

}  // namespace

double complete_K(double m) {
  check_parameter(m);
  double a = 1.0, b = std::sqrt(1.0 - m);
  for (int it = 0; it < 64 && std::abs(a - b) > 1e-15 * a; ++it) {
    const double g = std::sqrt(a * b);
    a = 0.5 * (a + b);
    b = g;
  }
  return kPi / (a + b);
}

double incomplete_F(double phi, double m) {
  check_parameter(m);
  if (m == 0.0) return phi;
  double npio2 = std::floor(phi / kPio2);
  if (std::fmod(std::abs(npio2), 2.0) == 1.0) npio2 += 1.0;
  const double K = complete_K(m);
  return ellik_reduced(phi - npio2 * kPio2, m, K) + npio2 * K;
}

double jacobi_am(double u, double m) {
  check_parameter(m);
  if (m == 0.0) return u;
  // AGM forward sweep, then backward amplitude recurrence.
  double a[32], c[32];
  a[0] = 1.0;
  c[0] = std::sqrt(m);
  double b = std::sqrt(1.0 - m);
  double twon = 1.0;
  int i = 0;
  while (std::abs(c[i] / a[i]) > kEps && i < 30) {
    const double ai = a[i];
    ++i;
    c[i] = 0.5 * (ai - b);
    const double g = std::sqrt(ai * b);
    a[i] = 0.5 * (ai + b);
    b = g;
    twon *= 2.0;
  }
  double phi = twon * a[i] * u;
  for (; i > 0; --i) {
    const double t = c[i] * std::sin(phi) / a[i];
    phi = 0.5 * (std::asin(t) + phi);
  }
  // Newton polish on F(phi) = u; dF/dphi = 1/sqrt(1 - m sin^2 phi).
  for (int it = 0; it < 3; ++it) {
    const double s = std::sin(phi);
    const double r = incomplete_F(phi, m) - u;
    phi -= r * std::sqrt(1.0 - m * s * s);
    if (std::abs(r) <= 4.0 * kEps * std::max(1.0, std::abs(u))) break;
  }
  return phi;
}

double jacobi_sn(double u, double m) { return std::sin(jacobi_am(u, m)); }
double jacobi_cn(double u, double m) { return std::cos(jacobi_am(u, m)); }

EllipticParams pendulum_params(double mu, double E) {
  if (!(mu >= 0.0)) throw DomainError("pendulum coupling mu must be nonnegative");
  if (!(E > 0.0)) throw DomainError("pendulum energy must be positive (rotating branch)");
  EllipticParams p;
  p.m = 2.0 * mu / (E + 2.0 * mu);
  p.K = complete_K(p.m);
  return p;
}

double pendulum_angle(double x, double mu, double E) {
  const EllipticParams p = pendulum_params(mu, E);
  return 0.5 - incomplete_F(kPi * (0.5 - x), p.m) / (2.0 * p.K);
}

double pendulum_position(double theta, double mu, double E) {
  const EllipticParams p = pendulum_params(mu, E);
  return 0.5 - jacobi_am(p.K * (1.0 - 2.0 * theta), p.m) / kPi;
}

}  // namespace rigidity
