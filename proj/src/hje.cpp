#include "rigidity/hje.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rigidity/errors.hpp"
#include "rigidity/mather.hpp"
#include "rigidity/spectral.hpp"

namespace rigidity {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> grid_point(std::size_t flat, std::size_t n, std::size_t d) {
  std::vector<double> t(d);
  for (std::size_t i = d; i-- > 0;) {
    t[i] = static_cast<double>(flat % n) / static_cast<double>(n);
    flat /= n;
  }
  return t;
}

std::size_t power(std::size_t n, std::size_t d) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < d; ++i) p *= n;
  return p;
}

}  // namespace

double mean_value(const TorusPotential& U) { return U.mean(); }

double FirstOrderSolution::value(std::span<const double> theta) const {
  double s = 0.0;
  for (const auto& [k, v] : u1) s += (v * std::polar(1.0, kTwoPi * dot(k, theta))).real();
  return s;
}

std::vector<double> FirstOrderSolution::gradient(std::span<const double> theta) const {
  std::vector<double> g(theta.size(), 0.0);
  for (const auto& [k, v] : u1) {
    const cplx d = cplx(0.0, kTwoPi) * v * std::polar(1.0, kTwoPi * dot(k, theta));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += k[i] * d.real();
  }
  return g;
}

FirstOrderSolution solve_first_order(const TorusPotential& U, std::span<const double> omega,
                                     std::optional<double> resonance_tol) {
  if (static_cast<int>(omega.size()) != U.dimension())
    throw DomainError("omega has " + std::to_string(omega.size()) + " components, U has dimension " +
                      std::to_string(U.dimension()));
  const double w = norm2(omega);
  if (!(w > 0.0)) throw DomainError("rotation vector must be nonzero");
  FirstOrderSolution sol;
  sol.omega.assign(omega.begin(), omega.end());
  sol.resonance_tol = resonance_tol.value_or(1e-9 * w);
  sol.alpha1 = mean_value(U);
  for (const auto& [k, v] : U.coefficients()) {
    if (is_zero(k)) continue;
    const double kw = dot(k, omega);
    if (std::abs(kw) > sol.resonance_tol) {
      const cplx u = -v / (cplx(0.0, kTwoPi) * kw);
      sol.u1[k] = u;
      sol.max_coefficient = std::max(sol.max_coefficient, std::abs(u));
    } else if (std::abs(v) > 0.0) {
      sol.resonant_obstructions.insert(k);
    }
  }
  return sol;
}

double transport_residual(const FirstOrderSolution& sol, const TorusPotential& U,
                          std::size_t grid_n) {
  if (grid_n == 0) throw DomainError("grid size must be positive");
  const TorusPotential V = U.without_modes(sol.resonant_obstructions);
  const std::size_t d = static_cast<std::size_t>(U.dimension());
  double worst = 0.0;
  for (std::size_t j = 0; j < power(grid_n, d); ++j) {
    const auto th = grid_point(j, grid_n, d);
    const auto g = sol.gradient(th);
    double r = V.value(th) - sol.alpha1;
    for (std::size_t i = 0; i < d; ++i) r += sol.omega[i] * g[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

TorusPotential pull_back(const TorusPotential& U, std::span<const ActionAngleChart> charts,
                         double tol, double drop_tol) {
  const std::size_t d = charts.size();
  if (static_cast<int>(d) != U.dimension()) throw DomainError("pull_back: dimension mismatch");
  bool all_free = true;
  for (const auto& c : charts) all_free = all_free && c.system().is_free();
  if (all_free) return U;

  int band = 0;
  for (std::size_t i = 0; i < d; ++i) band = std::max(band, degree(U, static_cast<int>(i)));
  auto coefficients = [&](std::size_t n) {
    std::vector<std::vector<double>> X(d);
    for (std::size_t i = 0; i < d; ++i) X[i] = charts[i].positions_on_grid(n);
    std::vector<cplx> samples(power(n, d));
    std::vector<double> x(d);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      std::size_t f = j;
      for (std::size_t i = d; i-- > 0;) {
        x[i] = X[i][f % n];
        f /= n;
      }
      samples[j] = U.value(x);
    }
    return spectral::dft_nd(samples, n, static_cast<int>(d));
  };
  // Coefficient at integer frequency vector l of an n^d FFT array.
  auto at = [d](const std::vector<cplx>& a, std::size_t n, const Mode& l) -> cplx {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (2 * static_cast<std::size_t>(std::abs(l[i])) >= n) return 0.0;
      idx = idx * n + spectral::fft_slot(l[i], n);
    }
    return a[idx];
  };

  std::size_t n = 32;
  while (n < static_cast<std::size_t>(4 * band + 8)) n *= 2;
  auto prev = coefficients(n);
  const std::size_t n_max = d <= 2 ? 1024 : 64;
  while (true) {
    auto cur = coefficients(2 * n);
    double change = 0.0;
    const long h = static_cast<long>(n);  // compare every frequency the finer grid resolves
    Mode l(d, 0);
    for (std::size_t j = 0; j < power(2 * n, d); ++j) {
      std::size_t f = j;
      for (std::size_t i = d; i-- > 0;) {
        l[i] = static_cast<int>(static_cast<long>(f % (2 * n)) - (f % (2 * n) >= n ? 2 * h : 0));
        f /= 2 * n;
      }
      change = std::max(change, std::abs(at(cur, 2 * n, l) - at(prev, n, l)));
    }
    n *= 2;
    prev = std::move(cur);
    if (change <= tol || n >= n_max) break;
  }

  TorusPotential out(static_cast<int>(d));
  Mode l(d, 0);
  for (std::size_t j = 0; j < prev.size(); ++j) {
    std::size_t f = j;
    for (std::size_t i = d; i-- > 0;) {
      const std::size_t s = f % n;
      l[i] = static_cast<int>(s < n / 2 ? static_cast<long>(s) : static_cast<long>(s) - static_cast<long>(n));
      f /= n;
    }
    if (!is_representative(l) && !is_zero(l)) continue;
    cplx v = prev[j];
    if (is_zero(l)) v = v.real();
    if (std::abs(v) > drop_tol) out.set(l, v);
  }
  return out;
}

LindstedtSolution lindstedt_first_order(std::span<const MechanicalSystem1D> systems,
                                        const TorusPotential& U, std::span<const double> c,
                                        double epsilon) {
  const std::size_t d = systems.size();
  if (c.size() != d || U.dimension() != static_cast<int>(d))
    throw DomainError("lindstedt: dimension mismatch");
  LindstedtSolution sol;
  sol.systems.assign(systems.begin(), systems.end());
  sol.U = U;
  sol.c.assign(c.begin(), c.end());
  sol.epsilon = epsilon;
  std::vector<ActionAngleChart> charts;
  for (std::size_t i = 0; i < d; ++i) {
    const AlphaFunction1D a(systems[i]);
    if (a.in_flat_region(c[i]))
      throw DomainError("c_" + std::to_string(i + 1) + " = " + std::to_string(c[i]) +
                        " lies in the flat region |c| <= " + std::to_string(a.c_flat()));
    const double E = a(c[i]);
    sol.energies.push_back(E);
    sol.omega.push_back(a.derivative(c[i]));
    sol.alpha0 += E;
    charts.emplace_back(systems[i], E);
  }
  sol.pulled_back = pull_back(U, charts);
  sol.first_order = solve_first_order(sol.pulled_back, sol.omega);
  sol.alpha_eps = sol.alpha0 + epsilon * sol.first_order.alpha1;
  return sol;
}

double lindstedt_defect(const LindstedtSolution& sol, std::size_t grid_n) {
  if (grid_n == 0) throw DomainError("grid size must be positive");
  const std::size_t d = sol.systems.size();
  std::vector<AlphaFunction1D> alphas;
  for (const auto& s : sol.systems) alphas.emplace_back(s);
  double worst = 0.0;
  for (std::size_t j = 0; j < power(grid_n, d); ++j) {
    const auto th = grid_point(j, grid_n, d);
    const auto g = sol.first_order.gradient(th);
    std::vector<double> x(d);
    double h = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double I = sol.c[i] + sol.epsilon * g[i];
      const double E = alphas[i](I);
      h += E;
      x[i] = position_at_energy(sol.systems[i], E, th[i]);
    }
    h += sol.epsilon * sol.U.value(x);
    worst = std::max(worst, std::abs(h - sol.alpha_eps));
  }
  return worst;
}

nlohmann::json to_json(const FirstOrderSolution& sol) {
  using nlohmann::json;
  json modes = json::array();
  for (const auto& [k, v] : sol.u1) modes.push_back({{"k", k}, {"re", v.real()}, {"im", v.imag()}});
  json obs = json::array();
  for (const Mode& k : sol.resonant_obstructions) obs.push_back(k);
  return json{{"omega", sol.omega},
              {"alpha1", sol.alpha1},
              {"resonance_tol", sol.resonance_tol},
              {"max_coefficient", sol.max_coefficient},
              {"modes", std::move(modes)},
              {"obstructions", std::move(obs)}};
}

}  // namespace rigidity
