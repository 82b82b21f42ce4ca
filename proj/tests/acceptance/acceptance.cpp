#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rigidity/action_angle.hpp"
#include "rigidity/averaging.hpp"
#include "rigidity/elliptic.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/flow.hpp"
#include "rigidity/gram.hpp"
#include "rigidity/hje.hpp"
#include "rigidity/mather.hpp"

using namespace rigidity;

namespace {

constexpr double kPi = std::numbers::pi;

// Collects sub-checks of one criterion; every failed check is listed.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failures_.empty(); }
  std::string summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < notes_.size(); ++i) os << (i ? "; " : "") << notes_[i];
    for (const auto& f : failures_) os << "; FAILED: " << f;
    return os.str();
  }

 private:
  std::vector<std::string> notes_, failures_;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

std::string fix(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double ratio_spread(const std::vector<double>& r) {
  return *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
}

std::vector<MechanicalSystem1D> axes(double mu1, double mu2) {
  auto one = [](double mu) { return mu == 0.0 ? MechanicalSystem1D::free() : MechanicalSystem1D::pendulum(mu); };
  return {one(mu1), one(mu2)};
}

double dist_to_4I(const Eigen::MatrixXcd& G) {
  return (G - 4.0 * Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

std::vector<Mode> coprime_b(int bound) {
  std::vector<Mode> out;
  for (int a = -bound; a <= bound; ++a)
    for (int b = -bound; b <= bound; ++b)
      if (a != 0 && b != 0 && std::gcd(a, b) == 1) out.push_back({a, b});
  return out;
}

TorusPotential random_trig(std::mt19937_64& rng, int deg, int terms) {
  std::uniform_int_distribution<int> kd(-deg, deg);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  TorusPotential U(2);
  for (int t = 0; t < terms; ++t) {
    const Mode k{kd(rng), kd(rng)};
    if (is_zero(k)) continue;
    U = U + TorusPotential::trig(2, k, amp(rng), amp(rng));
  }
  return U + TorusPotential::constant(2, amp(rng));
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  Verdict v;
  const auto sys = axes(0.0, 0.0);
  std::vector<Mode> modes;
  for (int a = -5; a <= 5; ++a)
    for (int b = -5; b <= 5; ++b) modes.push_back({a, b});
  const auto bs = coprime_b(5);
  double worst = 0.0;
  for (const Mode& b : bs) {
    const auto T = resonant_torus(sys, 1.0, ResonanceVector(b));
    const auto g = average_modes_on_grid(T, modes, 16);
    for (const Mode& k : modes) {
      const auto& vals = g.values.at(k);
      for (std::size_t j = 0; j < vals.size(); ++j) {
        const auto th = g.grid_point(j);
        const cplx expect = dot(k, std::span<const int>(b)) == 0
                                ? std::polar(1.0, 2 * kPi * (k[0] * th[0] + k[1] * th[1]))
                                : cplx(0.0);
        worst = std::max(worst, std::abs(vals[j] - expect));
      }
    }
  }
  v.note(std::to_string(bs.size()) + " resonances x " + std::to_string(modes.size()) + " modes x 256 points, max error " + sci(worst));
  v.check(worst <= 1e-10, "max error <= 1e-10");
  return v;
}

Verdict criterion2() {
  Verdict v;
  double worst = 0.0;
  for (double mu : {0.05, 0.2, 0.5})
    for (double E : {0.5, 1.0, 2.0}) {
      const ActionAngleChart chart(MechanicalSystem1D::pendulum(mu), E);
      for (int j = 0; j <= 100; ++j) {
        const double x = j / 100.0;
        double d = chart.angle_of_position(x) - pendulum_angle(x, mu, E);
        d -= std::round(d);
        worst = std::max(worst, std::abs(d));
        const double th = x;
        double dx = chart.position_of_angle(th) - pendulum_position(th, mu, E);
        dx -= std::round(dx);
        worst = std::max(worst, std::abs(dx));
      }
    }
  v.note("sup |theta_quad - theta_elliptic| and |x_quad - x_elliptic| = " + sci(worst));
  v.check(worst <= 1e-8, "sup <= 1e-8");
  return v;
}

Verdict criterion3() {
  Verdict v;
  const auto gap = [](double mu, double E) {
    return perturbation_gap(ActionAngleChart(MechanicalSystem1D::pendulum(mu), E));
  };
  const std::vector<double> mus{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  std::vector<double> g_mu;
  for (double mu : mus) g_mu.push_back(gap(mu, 1.0));
  const double s_mu = ls_slope(mus, g_mu);
  const std::vector<double> Es{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> inv_E, g_E;
  for (double E : Es) {
    inv_E.push_back(1.0 / E);
    g_E.push_back(gap(0.01, E));
  }
  const double s_E = ls_slope(inv_E, g_E);
  v.note("slope vs mu = " + fix(s_mu, 4) + ", slope vs 1/E (E in 1..16) = " + fix(s_E, 4));
  v.check(std::abs(s_mu - 1.0) <= 0.1, "slope vs mu in 1 +- 0.1");
  v.check(std::abs(s_E - 1.0) <= 0.1, "slope vs 1/E in 1 +- 0.1");
  return v;
}

Verdict criterion4() {
  Verdict v;
  const auto sys = MechanicalSystem1D::pendulum(0.25);
  const AlphaFunction1D alpha(sys);
  const double edge = 0.5 * 4.0 / kPi;
  double flat_max = 0.0;
  for (int j = -1000; j <= 1000; ++j) flat_max = std::max(flat_max, std::abs(alpha(edge * j / 1000.0)));
  v.check(flat_max == 0.0, "alpha = 0 on |c| <= c_flat");
  v.check(std::abs(alpha.c_flat() - edge) <= 1e-8, "c_flat = 0.5 * 4/pi");
  const double jump = std::max(std::abs(alpha(edge + 1e-9)), std::abs(alpha(edge + 1e-7)));
  v.check(jump <= 1e-6, "continuity at the edge within 1e-6");
  const auto ea = edge_analysis(sys);
  v.check(std::abs(ea.left_derivative) <= 1e-3, "left derivative within 1e-3 of 0");
  v.check(ea.log_divergence_certified && std::abs(ea.right_derivative) <= 1e-3,
          "right derivative (period log-divergence limit) within 1e-3 of 0");
  const double h = 1e-8;
  const double raw_right = (alpha(alpha.c_flat() + h) - alpha(alpha.c_flat())) / h;
  double min_second = 0.0;
  const double dc = 1e-3;
  for (double c = -2.0; c <= 2.0; c += 0.01)
    min_second = std::min(min_second, alpha(c + dc) - 2.0 * alpha(c) + alpha(c - dc));
  v.check(min_second >= -1e-9, "second differences >= -1e-9");
  const double sep = separatrix_constant(PeriodicPotential1D::pendulum());
  v.check(std::abs(sep - 4.0 / kPi) <= 1e-8, "separatrix constant = 4/pi within 1e-8");
  v.note("alpha(c_flat + 1e-7) = " + sci(jump) + ", T(E) fit slope " + fix(ea.slope_a, 5) + " (1/pi = " +
         fix(1.0 / kPi, 5) + "), right limit " + sci(ea.right_derivative) + ", raw quotient at h=1e-8 " +
         fix(raw_right, 3) + ", min 2nd diff " + sci(min_second) + ", |c - 4/pi| " + sci(std::abs(sep - 4.0 / kPi)));
  return v;
}

Verdict criterion5() {
  Verdict v;
  const std::vector<MechanicalSystem1D> sys{MechanicalSystem1D::pendulum(0.1), MechanicalSystem1D::pendulum(0.2)};
  const double f1 = AlphaFunction1D(sys[0]).c_flat(), f2 = AlphaFunction1D(sys[1]).c_flat();
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::bernoulli_distribution sign(0.5);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const std::vector<double> c{(sign(rng) ? 1 : -1) * (f1 + u(rng)), (sign(rng) ? 1 : -1) * (f2 + u(rng))};
    const InvariantGraph graph(sys, c);
    for (int a = 0; a < 64; ++a)
      for (int b = 0; b < 64; ++b) {
        const std::vector<double> x{a / 64.0, b / 64.0};
        worst = std::max(worst, std::abs(graph.residual(x)));
      }
  }
  v.note("max |H0(x, c + grad u_c) - alpha(c)| = " + sci(worst) + " over 5 classes x 64^2 points");
  v.check(worst < 1e-9, "residual < 1e-9");
  return v;
}

Verdict criterion6() {
  Verdict v;
  const double e = 8.0;
  double flat = 0.0;
  for (int a = 1; a <= 4; ++a) {
    for (int b = 1; b <= 4; ++b)
      flat = std::max(flat, dist_to_4I(gram_matrix(std::vector<int>{a, b}, axes(0, 0), e).matrix));
    GramOptions opt;
    opt.fixed_k1 = a;
    for (int b = 1; b <= 4; ++b)
      flat = std::max(flat, dist_to_4I(gram_matrix(std::vector<int>{a, b}, axes(0, 0), e, opt).matrix));
  }
  v.check(flat < 1e-8, "flat limit ||G(0) - 4I|| < 1e-8");

  // Degree 1 has no first-order term (deviation O(mu^2)); it must stay below the
  // linear bound set by the higher boxes.
  const std::vector<double> mus{0.01, 0.02, 0.04};
  double spread = 0.0, linear_floor = 1e300, deg1_max = 0.0, deg1_slope = 0.0;
  for (int deg = 1; deg <= 4; ++deg) {
    GramOptions fixed;
    fixed.fixed_k1 = 1;
    std::vector<double> r_fixed, r_box, d_box;
    for (double mu : mus) {
      r_fixed.push_back(dist_to_4I(gram_matrix(std::vector<int>{1, deg}, axes(0, mu), e, fixed).matrix) / mu);
      d_box.push_back(dist_to_4I(gram_matrix(std::vector<int>{deg, deg}, axes(0, mu), e).matrix));
      r_box.push_back(d_box.back() / mu);
    }
    if (deg == 1) {
      deg1_max = std::max(*std::max_element(r_fixed.begin(), r_fixed.end()),
                          *std::max_element(r_box.begin(), r_box.end()));
      deg1_slope = ls_slope(mus, d_box);
      continue;
    }
    spread = std::max({spread, ratio_spread(r_fixed), ratio_spread(r_box)});
    linear_floor = std::min({linear_floor, *std::min_element(r_fixed.begin(), r_fixed.end()),
                             *std::min_element(r_box.begin(), r_box.end())});
  }
  v.check(spread < 2.0, "||G(mu) - 4I|| / mu stable within factor 2 (deg 2..4)");
  v.check(deg1_max < linear_floor, "deg 1 deviation below the linear bound");

  bool full = true;
  double smin = 1e300;
  for (int step = 0; step <= 10; ++step) {
    const double mu = 0.005 * step;
    for (int deg = 1; deg <= 3; ++deg) {
      GramOptions fixed;
      fixed.fixed_k1 = 1;
      for (const auto& rep : {gram_matrix(std::vector<int>{1, deg}, axes(0, mu), e, fixed),
                              gram_matrix(std::vector<int>{deg, deg}, axes(0, mu), e)}) {
        full = full && rep.full_rank;
        smin = std::min(smin, rep.min_singular_value);
      }
    }
  }
  v.check(full, "full rank for mu in [0, 0.05], deg <= 3");
  v.note("e = 8: flat max deviation " + sci(flat) + ", max spread of dev/mu " + fix(spread, 3) +
         " (deg 2..4), deg 1 dev slope " + fix(deg1_slope, 3) + ", min sigma over sweep " + fix(smin, 4));
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::mt19937_64 rng(7);
  const std::vector<double> omega{1.0, std::numbers::sqrt2};
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto U = random_trig(rng, 4, 8);
    worst = std::max(worst, transport_residual(solve_first_order(U, omega), U, 32));
  }
  v.check(worst < 1e-10, "transport residual < 1e-10");

  const auto bs = coprime_b(5);
  std::uniform_int_distribution<std::size_t> pick(0, bs.size() - 1);
  std::uniform_real_distribution<double> lam(0.3, 3.0);
  int matches = 0;
  for (int t = 0; t < 10; ++t) {
    const Mode b = bs[pick(rng)];
    // Plant a mode orthogonal to b so the obstruction set is never empty.
    const auto U = random_trig(rng, 4, 8) + TorusPotential::trig(2, {b[1], -b[0]}, 0.5);
    const double l = lam(rng);
    const std::vector<double> w{l * b[0], l * b[1]};
    const auto sol = solve_first_order(U, w);
    if (sol.resonant_obstructions == annihilation_flags(U, ResonanceVector(b))) ++matches;
  }
  v.check(matches == 10, "obstruction set = annihilation flags");

  const auto sys = axes(0.0, 0.1);
  const auto U = TorusPotential::trig(2, {1, 1}, 1.0) + TorusPotential::trig(2, {1, -2}, 0.5, 0.3);
  const std::vector<double> c{1.0, 1.5};
  const std::vector<double> eps{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::vector<double> defect;
  for (double e : eps) defect.push_back(lindstedt_defect(lindstedt_first_order(sys, U, c, e), 12));
  const double slope = ls_slope(eps, defect);
  v.check(std::abs(slope - 2.0) <= 0.2, "Lindstedt defect slope 2 +- 0.2");
  v.note("max transport residual " + sci(worst) + ", obstruction matches " + std::to_string(matches) +
         "/10, Lindstedt slope " + fix(slope, 4) + " (mu = (0, 0.1))");
  return v;
}

double max_dev(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a - v.front()));
  return m;
}

Verdict criterion8() {
  Verdict v;
  const auto sys = axes(0.1, 0.2);
  const TorusPotential zero(2);
  const PhaseState s0{{0.1, 0.2}, {1.0, 0.8}};

  const auto y4 = integrate(sys, zero, 0.0, s0, 1e-3, 100.0, {.method = Integrator::Yoshida4, .record_stride = 10});
  const double f1 = max_dev(y4.F1);
  v.check(f1 < 1e-8, "F1 drift < 1e-8");

  const std::vector<double> hs{4e-3, 2e-3, 1e-3};
  std::vector<double> errs;
  for (double h : hs) errs.push_back(max_dev(integrate(sys, zero, 0.0, s0, h, 100.0).H));
  const double order = ls_slope(hs, errs);
  v.check(std::abs(order - 2.0) <= 0.2, "energy error slope 2 +- 0.2");

  const auto psys = axes(0.0, 0.1);
  const auto T = resonant_torus(psys, 1.0, ResonanceVector({1, 1}));
  PhaseState r0{T.position(std::vector<double>{0.0, 0.3}, 0.0), {}};
  for (int i = 0; i < 2; ++i)
    r0.p.push_back(std::copysign(std::sqrt(2.0 * (T.energies[i] + psys[i].mu() * psys[i].potential()(r0.x[i]))), T.c[i]));
  const auto w = rotation_vector_estimate(integrate(psys, zero, 0.0, r0, 1e-3, 1000.0, {.record_stride = 1000}));
  const double rot = std::max(std::abs(w[0] - T.charts[0].frequency()), std::abs(w[1] - T.charts[1].frequency()));
  v.check(rot <= 1e-4, "rotation vector within 1e-4 of chart frequency");

  const auto U = TorusPotential::trig(2, {1, 1}, 1.0);
  const auto fwd = integrate(sys, U, 0.01, s0, 1e-3, 100.0, {.record_stride = 100000});
  PhaseState back{fwd.x.back(), fwd.p.back()};
  for (double& p : back.p) p = -p;
  const auto bwd = integrate(sys, U, 0.01, back, 1e-3, 100.0, {.record_stride = 100000});
  double rt = 0.0;
  for (int i = 0; i < 2; ++i) {
    double dx = bwd.x.back()[i] - s0.x[i];
    rt = std::max({rt, std::abs(dx - std::round(dx)), std::abs(bwd.p.back()[i] + s0.p[i])});
  }
  v.check(rt < 1e-8, "time-reversal round trip < 1e-8");
  v.note("F1 drift " + sci(f1) + " (Yoshida4), energy order " + fix(order, 4) + " (Verlet), rotation error " +
         sci(rot) + " (T = 1000), round trip " + sci(rt));
  return v;
}

Verdict criterion9() {
  Verdict v;
  const auto sys = axes(0.0, 0.03);
  const auto U_sep = TorusPotential::trig(2, {1, 0}, 0.4) + TorusPotential::trig(2, {0, 1}, 0.0, 0.2) +
                     TorusPotential::trig(2, {0, 2}, 0.15);
  const auto planted = TorusPotential::trig(2, {1, 1}, 0.5);
  SeparabilityOptions opt;
  opt.seed = 9;
  const auto rep = separability_test(U_sep + planted, sys, 1.0, opt);
  const std::set<Mode> expect{{1, 1}, {-1, -1}};
  v.check(rep.verdict == "obstruction", "planted U reports an obstruction");
  v.check(rep.obstructions == expect, "flagged modes are exactly +-(1,1)");
  double residual = 0.0;
  for (const auto& r : rep.records) residual = std::max(residual, r.max_residual);
  v.check(residual > opt.residual_tol, "nonzero residual");
  const auto cleaned = separability_test((U_sep + planted).without_modes(rep.obstructions), sys, 1.0, opt);
  v.check(cleaned.verdict == "separable-consistent", "separable-consistent after removal");
  GramOptions g1;
  g1.fixed_k1 = 1;
  const auto gram_fixed = gram_matrix(std::vector<int>{1, 2}, sys, 1.0, g1);
  const auto gram_box = gram_matrix(std::vector<int>{2, 2}, sys, 1.0);
  v.check(gram_fixed.full_rank && gram_box.full_rank, "Gram certificate full rank");
  v.note("verdict " + rep.verdict + " -> " + cleaned.verdict + ", max residual " + sci(residual) +
         ", sigma_min " + fix(gram_fixed.min_singular_value, 4) + " / " + fix(gram_box.min_singular_value, 4));
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "annihilation oracle", 30.0, criterion1},
      {2, "quadrature vs elliptic charts", 10.0, criterion2},
      {3, "perturbation scaling", 0.0, criterion3},
      {4, "alpha-function structure", 0.0, criterion4},
      {5, "HJE graph residual", 0.0, criterion5},
      {6, "Gram flat limit and full rank", 120.0, criterion6},
      {7, "transport solver", 0.0, criterion7},
      {8, "flow diagnostics", 0.0, criterion8},
      {9, "end-to-end rigidity rehearsal", 60.0, criterion9},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0) v.check(secs < c.budget_s, "runtime < " + fix(c.budget_s, 0) + " s");
    const bool ok = v.passed();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ") [" << fix(secs, 2)
              << " s]: " << v.summary() << std::endl;
  }
  std::cout << (9 - failed) << "/9 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
