#pragma once

namespace rigidity {

// Parameter convention: m (not the modulus k = sqrt(m)). All functions accept
// 0 <= m < 1 and raise DomainError otherwise.

double complete_K(double m);
double incomplete_F(double phi, double m);
double jacobi_am(double u, double m);
double jacobi_sn(double u, double m);
double jacobi_cn(double u, double m);

struct EllipticParams {
  double m = 0.0;
  double K = 0.0;
};

// Pendulum H = p^2/2 - mu (1 - cos 2 pi x) on the rotating branch E > 0:
// m = 2 mu / (E + 2 mu).
EllipticParams pendulum_params(double mu, double E);

// Angle variable of the rotating pendulum as a function of position, and its inverse.
double pendulum_angle(double x, double mu, double E);
double pendulum_position(double theta, double mu, double E);

}  // namespace rigidity
