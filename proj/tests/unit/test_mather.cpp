#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "rigidity/errors.hpp"
#include "rigidity/mather.hpp"

using namespace rigidity;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(SeparatrixConstant, Values) {
  EXPECT_EQ(separatrix_constant(PeriodicPotential1D::constant(0.0)), 0.0);
  EXPECT_NEAR(separatrix_constant(PeriodicPotential1D::pendulum()), 4.0 / kPi, 1e-8 * 4.0 / kPi);
  const auto two_wells = PeriodicPotential1D({{0, 1.0}, {2, -0.5}, {-2, -0.5}});
  EXPECT_NEAR(separatrix_constant(two_wells), 4.0 / kPi, 1e-8 * 4.0 / kPi);
}

TEST(CPlus, LimitsAndMonotonicity) {
  EXPECT_NEAR(c_plus(MechanicalSystem1D::free(), 0.5), 1.0, 1e-15);
  const auto sys = MechanicalSystem1D::pendulum(0.25);
  // 30-digit quadrature at E = 1e-6.
  EXPECT_NEAR(c_plus(sys, 1e-6), 0.63662515019671574833, 1e-10);
  EXPECT_NEAR(c_plus(sys, 1e-6), 0.5 * 4.0 / kPi, 1e-4);
  double prev = 0.0;
  for (double E = 1e-8; E < 10.0; E *= 2.0) {
    const double c = c_plus(sys, E);
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_THROW(c_plus(sys, 0.0), DomainError);
}

TEST(Alpha1D, FreeRotorIsQuadratic) {
  for (double c : {-2.0, -0.3, 0.0, 0.7, 3.0}) EXPECT_NEAR(alpha_1d(MechanicalSystem1D::free(), c), 0.5 * c * c, 1e-14);
}

TEST(Alpha1D, PendulumFlatPieceAndInversion) {
  const auto sys = MechanicalSystem1D::pendulum(0.25);
  const AlphaFunction1D alpha(sys);
  EXPECT_NEAR(alpha.c_flat(), 0.5 * 4.0 / kPi, 1e-9);
  EXPECT_EQ(alpha(0.4), 0.0);
  EXPECT_EQ(alpha(-0.6), 0.0);
  EXPECT_EQ(alpha(alpha.c_flat()), 0.0);
  const double E = alpha(1.0);
  EXPECT_NEAR(E, 0.26594885571555111644, 1e-10);
  EXPECT_LT(std::abs(c_plus(sys, E) - 1.0), 1e-9);
  EXPECT_EQ(alpha(1.3), alpha(-1.3));
}

TEST(Alpha1D, ContinuityAndConvexity) {
  const AlphaFunction1D alpha(MechanicalSystem1D::pendulum(0.25));
  EXPECT_LT(alpha(alpha.c_flat() + 1e-8), 1e-6);
  const double h = 1e-2;
  for (double c = -2.0; c <= 2.0; c += h)
    EXPECT_GE(alpha(c + h) - 2 * alpha(c) + alpha(c - h), -1e-9) << c;
  double prev = -1.0;
  for (double c = 0.0; c <= 2.0; c += 0.05) {
    EXPECT_GE(alpha(c), prev);
    prev = alpha(c);
  }
}

TEST(Alpha1D, EdgeDifferenceQuotients) {
  // The right difference quotient decreases to 0 only logarithmically; check it is
  // monotone in h and bounded by the frequency at the end of the step (convexity).
  const AlphaFunction1D alpha(MechanicalSystem1D::pendulum(0.25));
  const double cf = alpha.c_flat();
  EXPECT_EQ((alpha(cf) - alpha(cf - 1e-6)) / 1e-6, 0.0);
  double prev = 1e300;
  for (double h = 1e-2; h >= 1e-8; h *= 0.1) {
    const double q = (alpha(cf + h) - alpha(cf)) / h;
    EXPECT_LT(q, prev);
    EXPECT_LE(q, alpha.derivative(cf + h) * (1 + 1e-9));
    prev = q;
  }
}

TEST(Alpha1D, DerivativeDuality) {
  const auto sys = MechanicalSystem1D::pendulum(0.25);
  const AlphaFunction1D alpha(sys);
  for (double E : {0.05, 0.5, 2.0}) {
    const double c = c_plus(sys, E), h = 1e-5;
    const double fd = (alpha(c + h) - alpha(c - h)) / (2 * h);
    EXPECT_NEAR(fd, frequency(sys, E), 1e-6);
    EXPECT_NEAR(alpha.derivative(c), frequency(sys, E), 1e-9);
  }
}

TEST(EdgeAnalysis, LogarithmicPeriodDivergence) {
  const auto r = edge_analysis(MechanicalSystem1D::pendulum(0.25));
  EXPECT_TRUE(r.log_divergence_certified);
  EXPECT_GT(r.slope_a, 0.0);
  EXPECT_EQ(r.right_derivative, 0.0);
  EXPECT_EQ(r.left_derivative, 0.0);
  // Pendulum near the separatrix: T(E) ~ ln(1/E) / (2 pi sqrt(mu)).
  EXPECT_NEAR(r.slope_a, 1.0 / (2 * kPi * std::sqrt(0.25)), 1e-3);
}

TEST(AlphaSum, Components) {
  const std::vector<MechanicalSystem1D> free2{MechanicalSystem1D::free(), MechanicalSystem1D::free()};
  EXPECT_NEAR(alpha_sum(free2, std::vector<double>{1.0, 2.0}), 2.5, 1e-14);
  const std::vector<MechanicalSystem1D> free3(3, MechanicalSystem1D::free());
  EXPECT_NEAR(alpha_sum(free3, std::vector<double>{1.0, 1.0, 1.0}), 1.5, 1e-14);
  const std::vector<MechanicalSystem1D> mixed{MechanicalSystem1D::free(), MechanicalSystem1D::pendulum(0.25)};
  EXPECT_NEAR(alpha_sum(mixed, std::vector<double>{1.0, 0.3}), 0.5, 1e-14);
  EXPECT_THROW(alpha_sum(mixed, std::vector<double>{1.0}), DomainError);
}

TEST(GradUc, FreeIsZeroAndFlatRejected) {
  const std::vector<MechanicalSystem1D> free2(2, MechanicalSystem1D::free());
  const auto g = grad_u_c(free2, std::vector<double>{1.0, -2.0}, std::vector<double>{0.3, 0.4});
  EXPECT_NEAR(g[0], 0.0, 1e-15);
  EXPECT_NEAR(g[1], 0.0, 1e-15);
  const std::vector<MechanicalSystem1D> pend{MechanicalSystem1D::pendulum(0.1), MechanicalSystem1D::pendulum(0.2)};
  EXPECT_THROW(grad_u_c(pend, std::vector<double>{0.1, 1.0}, std::vector<double>{0.0, 0.0}), DomainError);
}

TEST(GradUc, HamiltonJacobiResidualAndZeroMean) {
  const std::vector<MechanicalSystem1D> sys{MechanicalSystem1D::pendulum(0.1), MechanicalSystem1D::pendulum(0.2)};
  const std::vector<double> c{1.2, -1.5};
  const InvariantGraph graph(sys, c);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      worst = std::max(worst, std::abs(graph.residual(std::vector<double>{i / 64.0, j / 64.0})));
  EXPECT_LT(worst, 1e-9);
  EXPECT_NEAR(graph_residual(sys, c, std::vector<double>{0.3, 0.7}), 0.0, 1e-9);
  // Periodicity of u_c: each component of grad u_c has zero mean in its own variable.
  for (int axis = 0; axis < 2; ++axis) {
    double mean = 0.0;
    const int n = 2048;
    for (int j = 0; j < n; ++j) {
      std::vector<double> x{0.0, 0.0};
      x[axis] = (j + 0.5) / n;
      mean += graph.grad_u(x)[axis];
    }
    EXPECT_NEAR(mean / n, 0.0, 1e-8);
  }
}

TEST(AlphaCsv, Profile) {
  std::ostringstream os;
  write_alpha_csv(AlphaFunction1D(MechanicalSystem1D::pendulum(0.25)), -1.0, 1.0, 5, os);
  EXPECT_EQ(os.str().substr(0, 8), "c,alpha\n");
}
