#include "rigidity/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "rigidity/errors.hpp"
#include "rigidity/parallel.hpp"

namespace rigidity {

namespace {

constexpr double kLiftLimit = 0.4;

void check_state(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                 const PhaseState& s) {
  if (s.x.size() != systems.size() || s.p.size() != systems.size() ||
      U.dimension() != static_cast<int>(systems.size()))
    throw DomainError("phase state, systems and potential dimensions differ");
}

double wrap(double x) {
  const double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

// Force -dH/dx at the given positions.
void force(std::span<const MechanicalSystem1D> systems, const TorusPotential& U, double epsilon,
           std::span<const double> x, std::vector<double>& f) {
  const std::size_t d = systems.size();
  for (std::size_t i = 0; i < d; ++i)
    f[i] = systems[i].is_free() ? 0.0 : systems[i].mu() * systems[i].potential().derivative(x[i]);
  if (epsilon != 0.0 && !U.empty()) {
    const auto g = U.gradient(x);
    for (std::size_t i = 0; i < d; ++i) f[i] -= epsilon * g[i];
  }
}

struct Stepper {
  std::span<const MechanicalSystem1D> systems;
  const TorusPotential& U;
  double epsilon;
  std::vector<double> x, lift, p, f;

  void verlet(double h) {
    const std::size_t d = x.size();
    for (std::size_t i = 0; i < d; ++i) p[i] += 0.5 * h * f[i];
    for (std::size_t i = 0; i < d; ++i) {
      const double dx = h * p[i];
      if (std::abs(dx) >= kLiftLimit)
        throw DomainError("step too large for lift tracking: h|p_" + std::to_string(i + 1) +
                          "| = " + std::to_string(std::abs(dx)) + " >= 0.4");
      lift[i] += dx;
      x[i] = wrap(x[i] + dx);
    }
    force(systems, U, epsilon, x, f);
    for (std::size_t i = 0; i < d; ++i) p[i] += 0.5 * h * f[i];
  }

  void step(double h, Integrator method) {
    if (method == Integrator::Verlet) {
      verlet(h);
      return;
    }
    static const double c = std::cbrt(2.0);
    static const double w1 = 1.0 / (2.0 - c);
    static const double w0 = -c / (2.0 - c);
    verlet(w1 * h);
    verlet(w0 * h);
    verlet(w1 * h);
  }
};

}  // namespace

double hamiltonian(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                   double epsilon, const PhaseState& s) {
  check_state(systems, U, s);
  double h = 0.0;
  for (std::size_t i = 0; i < systems.size(); ++i)
    h += 0.5 * s.p[i] * s.p[i] - systems[i].mu() * systems[i].potential()(s.x[i]);
  if (epsilon != 0.0) h += epsilon * U.value(s.x);
  return h;
}

double first_integral_F1(const PhaseState& s, const MechanicalSystem1D& sys1) {
  if (s.x.empty() || s.p.empty()) throw DomainError("empty phase state");
  return 0.5 * s.p[0] * s.p[0] - sys1.mu() * sys1.potential()(s.x[0]);
}

double corrected_first_integral(const PhaseState& s, const MechanicalSystem1D& sys1,
                                const TorusPotential& U, double epsilon) {
  double u1 = 0.0;
  for (const auto& [k, v] : U.coefficients()) {
    bool axis1 = k[0] != 0;
    for (std::size_t i = 1; i < k.size(); ++i) axis1 = axis1 && k[i] == 0;
    if (axis1) u1 += (v * std::polar(1.0, 2.0 * std::numbers::pi * k[0] * s.x[0])).real();
  }
  return first_integral_F1(s, sys1) + epsilon * u1;
}

TrajectoryRecord integrate(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                           double epsilon, const PhaseState& s0, double h, double T,
                           const FlowOptions& options) {
  check_state(systems, U, s0);
  if (!(h > 0.0)) throw DomainError("step size h must be positive");
  if (!(T >= h)) throw DomainError("horizon T must be at least h");
  if (options.record_stride == 0) throw DomainError("record stride must be positive");
  const std::size_t d = systems.size();
  const auto steps = static_cast<std::size_t>(std::ceil(T / h - 1e-9));

  Stepper st{systems, U, epsilon, {}, s0.x, s0.p, std::vector<double>(d)};
  st.x.resize(d);
  for (std::size_t i = 0; i < d; ++i) st.x[i] = wrap(s0.x[i]);
  force(systems, U, epsilon, st.x, st.f);

  TrajectoryRecord rec;
  rec.h = h;
  rec.stride = options.record_stride;
  auto record = [&](std::size_t n) {
    const PhaseState s{st.x, st.p};
    rec.t.push_back(static_cast<double>(n) * h);
    rec.x.push_back(st.x);
    rec.lift.push_back(st.lift);
    rec.p.push_back(st.p);
    rec.H.push_back(hamiltonian(systems, U, epsilon, s));
    rec.F1.push_back(first_integral_F1(s, systems[0]));
  };
  record(0);
  for (std::size_t n = 1; n <= steps; ++n) {
    st.step(h, options.method);
    if (n % options.record_stride == 0 || n == steps) record(n);
  }
  return rec;
}

std::vector<TrajectoryRecord> integrate_batch(std::span<const MechanicalSystem1D> systems,
                                              const TorusPotential& U, double epsilon,
                                              std::span<const PhaseState> initial, double h,
                                              double T, const FlowOptions& options,
                                              unsigned threads) {
  std::vector<TrajectoryRecord> out(initial.size());
  parallel_for(initial.size(), resolve_threads(threads), [&](std::size_t j) {
    out[j] = integrate(systems, U, epsilon, initial[j], h, T, options);
  });
  return out;
}

std::vector<double> rotation_vector_estimate(const TrajectoryRecord& traj) {
  if (traj.size() < 2) throw DomainError("trajectory has fewer than two records");
  const double dt = traj.t.back() - traj.t.front();
  std::vector<double> w(traj.lift.front().size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (traj.lift.back()[i] - traj.lift.front()[i]) / dt;
  return w;
}

double maupertuis_factor(std::span<const MechanicalSystem1D> systems, double e,
                         std::span<const double> x) {
  if (!(e > 0.0)) throw DomainError("Maupertuis energy e must be positive");
  if (x.size() != systems.size()) throw DomainError("point and systems dimensions differ");
  double phi = e;
  for (std::size_t i = 0; i < systems.size(); ++i) phi += systems[i].mu() * systems[i].potential()(x[i]);
  return phi;
}

double maupertuis_factor(std::span<const MechanicalSystem1D> systems, const TorusPotential& U,
                         double epsilon, double e, std::span<const double> x) {
  double phi = maupertuis_factor(systems, e, x);
  if (epsilon != 0.0) phi -= epsilon * U.value(x);
  return phi;
}

std::string to_string(LevelSet kind) {
  switch (kind) {
    case LevelSet::Torus: return "torus";
    case LevelSet::Annulus1: return "annulus-1";
    case LevelSet::Annulus2: return "annulus-2";
    case LevelSet::Singular: return "singular";
  }
  return "?";
}

LevelSet classify_level_set(double e, double f, std::span<const MechanicalSystem1D> systems,
                            double tol) {
  if (systems.size() != 2) throw DomainError("level-set classification needs d = 2");
  const double m1 = systems[0].mu() * systems[0].max_potential();
  const double m2 = systems[1].mu() * systems[1].max_potential();
  const double g = e - f;
  const double scale = tol * std::max({1.0, std::abs(e), std::abs(f)});
  auto at = [scale](double a, double b) { return std::abs(a - b) <= scale; };
  if (at(f, 0.0) || at(g, 0.0) || (m1 > 0.0 && at(f, -m1)) || (m2 > 0.0 && at(g, -m2)))
    return LevelSet::Singular;
  if (f > 0.0 && g > 0.0) return LevelSet::Torus;
  if (f < 0.0 && f > -m1 && g > 0.0) return LevelSet::Annulus1;
  if (f > 0.0 && g < 0.0 && g > -m2) return LevelSet::Annulus2;
  throw DomainError("no level set for (e, f) = (" + std::to_string(e) + ", " + std::to_string(f) +
                    ")");
}

double geodesic_residual(const TrajectoryRecord& traj, std::span<const MechanicalSystem1D> systems,
                         const TorusPotential& U, double epsilon, double e, std::size_t every) {
  if (traj.size() < 3) throw DomainError("trajectory has fewer than three records");
  if (every == 0) throw DomainError("sampling interval must be positive");
  const std::size_t d = systems.size();
  if (traj.lift.front().size() != d) throw DomainError("trajectory and systems dimensions differ");
  const double dt = traj.h * static_cast<double>(traj.stride);
  double worst = 0.0;
  std::vector<double> v(d), a(d), grad(d), acc(d);
  for (std::size_t j = 1; j + 1 < traj.size(); j += every) {
    if (traj.t[j + 1] - traj.t[j] != traj.t[j] - traj.t[j - 1]) continue;
    const auto& xm = traj.lift[j - 1];
    const auto& x0 = traj.lift[j];
    const auto& xp = traj.lift[j + 1];
    for (std::size_t i = 0; i < d; ++i) {
      v[i] = (xp[i] - xm[i]) / (2.0 * dt);
      a[i] = (xp[i] - 2.0 * x0[i] + xm[i]) / (dt * dt);
    }
    const auto& x = traj.x[j];
    const double phi = maupertuis_factor(systems, U, epsilon, e, x);
    // grad phi = -grad W
    for (std::size_t i = 0; i < d; ++i)
      grad[i] = systems[i].is_free() ? 0.0 : systems[i].mu() * systems[i].potential().derivative(x[i]);
    if (epsilon != 0.0 && !U.empty()) {
      const auto g = U.gradient(x);
      for (std::size_t i = 0; i < d; ++i) grad[i] -= epsilon * g[i];
    }
    double gv = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      gv += grad[i] * v[i];
      vv += v[i] * v[i];
    }
    for (std::size_t i = 0; i < d; ++i) acc[i] = a[i] + (gv * v[i] - 0.5 * vv * grad[i]) / phi;
    double av = 0.0;
    for (std::size_t i = 0; i < d; ++i) av += acc[i] * v[i];
    double perp = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = acc[i] - av / vv * v[i];
      perp += c * c;
    }
    worst = std::max(worst, std::sqrt(perp));
  }
  return worst;
}

void write_trajectory_csv(const TrajectoryRecord& traj, std::ostream& os) {
  const std::size_t d = traj.size() ? traj.x.front().size() : 0;
  os << "t";
  for (const char* name : {"x", "lift", "p"})
    for (std::size_t i = 1; i <= d; ++i) os << ',' << name << i;
  os << ",H,F1\n";
  os << std::setprecision(17);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    os << traj.t[j];
    for (const auto* col : {&traj.x[j], &traj.lift[j], &traj.p[j]})
      for (double v : *col) os << ',' << v;
    os << ',' << traj.H[j] << ',' << traj.F1[j] << '\n';
  }
}

}  // namespace rigidity
