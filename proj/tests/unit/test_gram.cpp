#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rigidity/errors.hpp"
#include "rigidity/gram.hpp"

using namespace rigidity;

namespace {

std::vector<MechanicalSystem1D> theorem2(double mu) {
  return {MechanicalSystem1D::free(),
          mu == 0.0 ? MechanicalSystem1D::free() : MechanicalSystem1D::pendulum(mu)};
}

double dist_to_4I(const Eigen::MatrixXcd& G) {
  const Eigen::MatrixXcd I4 = 4.0 * Eigen::MatrixXcd::Identity(G.rows(), G.cols());
  return (G - I4).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Gram, ResonanceSetFixedK1) {
  const std::vector<int> deg{1, 2};
  const auto bs = gram_resonances(deg, 1);
  const std::vector<ResonanceVector> expect{ResonanceVector({-2, -1}), ResonanceVector({-2, 1}),
                                            ResonanceVector({-1, -1}), ResonanceVector({-1, 1}),
                                            ResonanceVector({1, -1}),  ResonanceVector({1, 1}),
                                            ResonanceVector({2, -1}),  ResonanceVector({2, 1})};
  EXPECT_EQ(bs, expect);
  for (const auto& b : gram_resonances(std::vector<int>{3, 3}, std::nullopt)) EXPECT_LE(b.max_abs(), 3);
}

TEST(Gram, FlatLimitFixedK1) {
  for (int k1 : {1, 2, -3})
    for (int deg = 1; deg <= 4; ++deg) {
      GramOptions opt;
      opt.fixed_k1 = k1;
      const std::vector<int> degrees{std::abs(k1), deg};
      const auto rep = gram_matrix(degrees, theorem2(0.0), 4.0, opt);
      EXPECT_EQ(rep.matrix.rows(), 2 * deg);
      EXPECT_LT(dist_to_4I(rep.matrix), 1e-8) << "k1=" << k1 << " deg=" << deg;
      EXPECT_TRUE(rep.full_rank);
      EXPECT_NEAR(rep.min_singular_value, 4.0, 1e-8);
    }
}

TEST(Gram, FlatLimitFullBox) {
  std::vector<MechanicalSystem1D> flat(2);
  for (int deg = 1; deg <= 4; ++deg) {
    const std::vector<int> degrees{deg, deg};
    const auto rep = gram_matrix(degrees, flat, 8.0);
    EXPECT_EQ(rep.matrix.rows(), 4 * deg * deg);
    EXPECT_LT(dist_to_4I(rep.matrix), 1e-8) << deg;
  }
}

TEST(Gram, PendulumMatchesIndependentReference) {
  GramOptions opt;
  opt.fixed_k1 = 1;
  const std::vector<int> degrees{1, 2};
  const auto rep = gram_matrix(degrees, theorem2(0.05), 1.0, opt);
  // rows/columns k2 = -2, -1, 1, 2
  const double ref[4][4] = {
      {3.896908461608401, -0.043672575546096, 0.000053721129436, 0.000008695482406},
      {-0.043672575546096, 4.009549738326095, 0.001135095634140, 0.000053721129436},
      {0.000053721129436, 0.001135095634140, 4.009549738326095, -0.043672575546096},
      {0.000008695482406, 0.000053721129436, -0.043672575546096, 3.896908461608401}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(rep.matrix(i, j).real(), ref[i][j], 1e-9) << i << "," << j;
      EXPECT_NEAR(rep.matrix(i, j).imag(), 0.0, 1e-9);
    }
  EXPECT_NEAR(rep.det.real(), 244.07626606088112, 1e-6);
}

TEST(Gram, QuadratureAgreesWithSpectral) {
  for (bool fixed : {true, false}) {
    GramOptions a, b;
    if (fixed) a.fixed_k1 = b.fixed_k1 = 1;
    b.method = GramMethod::Quadrature;
    const std::vector<int> degrees{1, 2};
    const auto sys = theorem2(0.05);
    const auto ga = gram_matrix(degrees, sys, 1.5, a);
    const auto gb = gram_matrix(degrees, sys, 1.5, b);
    EXPECT_LT((ga.matrix - gb.matrix).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(gb.quadrature_error_estimate, 1e-8);
  }
}

TEST(Gram, ModeFunctionLimits) {
  std::vector<MechanicalSystem1D> flat(2);
  const auto T = resonant_torus(flat, 2.5, ResonanceVector({1, 2}));
  const std::vector<double> th{0.2, 0.7};
  const cplx on = mode_function(T, {2, -1}, th);
  EXPECT_LT(std::abs(on - std::polar(1.0, 2 * M_PI * (2 * 0.2 - 0.7))), 1e-12);
  EXPECT_LT(std::abs(mode_function(T, {1, 1}, th)), 1e-12);
}

TEST(Gram, ModeFunctionDeviationIsLinearInMu) {
  const std::vector<double> th{0.1, 0.35};
  std::vector<double> ratio;
  for (double mu : {0.01, 0.02, 0.04}) {
    const auto T = resonant_torus(theorem2(mu), 2.0, ResonanceVector({1, -1}));
    const auto T0 = resonant_torus(theorem2(0.0), 2.0, ResonanceVector({1, -1}));
    const double dev = std::abs(mode_function(T, {1, 2}, th) - mode_function(T0, {1, 2}, th));
    ratio.push_back(dev / mu);
  }
  EXPECT_LT(*std::max_element(ratio.begin(), ratio.end()) / *std::min_element(ratio.begin(), ratio.end()), 2.0);
}

TEST(Gram, LinearDeviationFromFlatLimit) {
  for (int deg : {2, 3}) {
    GramOptions opt;
    opt.fixed_k1 = 1;
    const std::vector<int> degrees{1, deg};
    std::vector<double> r;
    for (double mu : {0.01, 0.02, 0.04, 0.05}) {
      const auto rep = gram_matrix(degrees, theorem2(mu), 4.0, opt);
      r.push_back(dist_to_4I(rep.matrix) / mu);
    }
    EXPECT_LT(*std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end()), 2.0);
  }
}

TEST(Gram, PositiveSemidefiniteAndFullRank) {
  for (double mu : {0.0, 0.01, 0.03, 0.05})
    for (int deg = 1; deg <= 3; ++deg) {
      GramOptions opt;
      opt.fixed_k1 = 1;
      const std::vector<int> degrees{1, deg};
      const auto rep = gram_matrix(degrees, theorem2(mu), 1.0, opt);
      EXPECT_GE(rep.min_eigenvalue, -1e-8);
      EXPECT_TRUE(rep.full_rank) << mu << " " << deg;
      const auto full = gram_matrix(std::vector<int>{deg, deg}, theorem2(mu), 2.0);
      EXPECT_GE(full.min_eigenvalue, -1e-8);
      EXPECT_TRUE(full.full_rank);
      EXPECT_LT((full.matrix - full.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Gram, CertificateDetectsZeroRow) {
  GramReport rep;
  rep.matrix = 4.0 * Eigen::MatrixXcd::Identity(4, 4);
  EXPECT_TRUE(full_rank_certificate(rep, 1e-8));
  EXPECT_NEAR(rep.min_singular_value, 4.0, 1e-14);
  EXPECT_NEAR(rep.det.real(), 256.0, 1e-10);
  rep.matrix.row(2).setZero();
  rep.matrix.col(2).setZero();
  EXPECT_FALSE(full_rank_certificate(rep, 1e-8));
  EXPECT_NEAR(rep.min_singular_value, 0.0, 1e-14);
}

TEST(Gram, AnnihilatedModesCarryFlatPattern) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> comp(-3, 3);
  std::vector<MechanicalSystem1D> flat(2);
  for (int trial = 0; trial < 3; ++trial) {
    TorusPotential U(2);
    for (int j = 0; j < 4; ++j) {
      Mode k{comp(rng), comp(rng)};
      if (is_zero(k)) continue;
      U.set(k, cplx(0.5, 0.1 * j));
    }
    const std::vector<int> degrees{std::max(1, degree(U, 0)), std::max(1, degree(U, 1))};
    const auto rep = gram_matrix(degrees, flat, 8.0);
    for (const auto& b : spectrum_sets(U).coprime_orthogonal)
      for (const Mode& k : annihilation_flags(U, b)) {
        const auto it = std::find(rep.indices.begin(), rep.indices.end(), k);
        ASSERT_NE(it, rep.indices.end());
        const long r = it - rep.indices.begin();
        for (long c = 0; c < rep.matrix.cols(); ++c)
          EXPECT_NEAR(std::abs(rep.matrix(r, c)), c == r ? 4.0 : 0.0, 1e-8);
      }
  }
}

TEST(Gram, RejectsBadInput) {
  GramOptions opt;
  opt.fixed_k1 = 1;
  std::vector<MechanicalSystem1D> pend{MechanicalSystem1D::pendulum(0.1), MechanicalSystem1D::free()};
  EXPECT_THROW(gram_matrix(std::vector<int>{1, 2}, pend, 1.0, opt), DomainError);
  EXPECT_THROW(gram_matrix(std::vector<int>{1, 0}, theorem2(0.0), 1.0), DomainError);
  std::vector<MechanicalSystem1D> heavy{MechanicalSystem1D::pendulum(2.0), MechanicalSystem1D::pendulum(2.0)};
  EXPECT_THROW(gram_matrix(std::vector<int>{1, 1}, heavy, 1e-4), DomainError);
}

TEST(MuSweep, FlatRowAndFullRank) {
  const std::vector<PeriodicPotential1D> pots{PeriodicPotential1D::constant(0.0), PeriodicPotential1D::pendulum()};
  std::vector<std::vector<double>> grid;
  for (int j = 0; j <= 10; ++j) grid.push_back({0.0, 0.02 * j});
  GramOptions opt;
  opt.fixed_k1 = 1;
  const std::vector<int> degrees{1, 2};
  const auto s = mu_sweep(degrees, pots, 1.0, grid, opt);
  ASSERT_EQ(s.rows.size(), 11u);
  EXPECT_NEAR(s.rows[0].sigma_min, 4.0, 1e-8);
  for (const auto& r : s.rows) EXPECT_TRUE(r.full_rank);
  ASSERT_TRUE(s.measured_threshold.has_value());
  EXPECT_NEAR(*s.measured_threshold, 0.2, 1e-12);
  EXPECT_TRUE(s.candidate_brackets.empty());
  std::ostringstream os;
  write_sweep_csv(s, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "mu,detG_re,detG_im,sigma_min,full_rank");
  EXPECT_EQ(os.str().substr(os.str().find('\n') + 1, 2), "0,");
}

TEST(MuSweep, DeterminantContinuousUnderRefinement) {
  const std::vector<PeriodicPotential1D> pots{PeriodicPotential1D::constant(0.0), PeriodicPotential1D::pendulum()};
  GramOptions opt;
  opt.fixed_k1 = 1;
  const std::vector<int> degrees{1, 2};
  auto max_jump = [&](int n) {
    std::vector<std::vector<double>> grid;
    for (int j = 0; j <= n; ++j) grid.push_back({0.0, 0.1 * j / n});
    const auto s = mu_sweep(degrees, pots, 1.0, grid, opt);
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < s.rows.size(); ++j) m = std::max(m, std::abs(s.rows[j + 1].det - s.rows[j].det));
    return m;
  };
  const double a = max_jump(5), b = max_jump(10), c = max_jump(20);
  EXPECT_LT(b, 0.6 * a);
  EXPECT_LT(c, 0.6 * b);
}

TEST(MuSweep, TwoAxisHeader) {
  const std::vector<PeriodicPotential1D> pots{PeriodicPotential1D::pendulum(), PeriodicPotential1D::pendulum()};
  const std::vector<std::vector<double>> grid{{0.0, 0.0}, {0.01, 0.02}, {0.02, 0.01}};
  const auto s = mu_sweep(std::vector<int>{1, 1}, pots, 2.0, grid);
  std::ostringstream os;
  write_sweep_csv(s, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "mu1,mu2,detG_re,detG_im,sigma_min,full_rank");
  const auto j = to_json(s);
  EXPECT_EQ(j["rows"].size(), 3u);
}
