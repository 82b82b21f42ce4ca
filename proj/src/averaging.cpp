#include "rigidity/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rigidity/errors.hpp"
#include "rigidity/parallel.hpp"
#include "rigidity/roots.hpp"

namespace rigidity {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t positive_mod(long a, std::size_t n) {
  const long m = a % static_cast<long>(n);
  return static_cast<std::size_t>(m < 0 ? m + static_cast<long>(n) : m);
}

std::vector<double> split_two(std::span<const MechanicalSystem1D> systems, double e,
                              const ResonanceVector& b) {
  const double a1 = std::abs(b[0]), a2 = std::abs(b[1]);
  auto g = [&](double s) {
    return frequency(systems[0], s) * a2 - frequency(systems[1], e - s) * a1;
  };
  const double lo = e * 1e-14, hi = e * (1.0 - 1e-14);
  if (g(lo) >= 0.0 || g(hi) <= 0.0)
    throw InfeasibleResonance("resonance " + to_string(b.components()) +
                              ": no energy split keeps both axes rotating at e = " +
                              std::to_string(e));
  const double s = solve_increasing(g, lo, hi);
  return {s, e - s};
}

std::vector<double> split_by_frequency(std::span<const MechanicalSystem1D> systems, double e,
                                       const ResonanceVector& b) {
  const std::size_t d = systems.size();
  double b2 = 0.0, wells = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    b2 += static_cast<double>(b[i]) * b[i];
    wells += systems[i].mu() * systems[i].max_potential();
  }
  auto energies = [&](double lambda) {
    std::vector<double> E(d);
    for (std::size_t i = 0; i < d; ++i)
      E[i] = energy_of_frequency(systems[i], lambda * std::abs(b[i]));
    return E;
  };
  auto total = [&](double lambda) {
    double s = 0.0;
    for (double Ei : energies(lambda)) s += Ei;
    return s - e;
  };
  const double lo = std::sqrt(2.0 * e / b2), hi = std::sqrt(2.0 * (e + wells) / b2);
  return energies(solve_increasing(total, lo, hi));
}

}  // namespace

double default_margin(double e) { return 0.05 * std::sqrt(2.0 * e); }

std::vector<double> ResonantTorus::position(std::span<const double> theta0, double t) const {
  std::vector<double> x(charts.size());
  for (std::size_t i = 0; i < charts.size(); ++i)
    x[i] = charts[i].position_of_angle(theta0[i] + b[i] * t);
  return x;
}

ResonantTorus resonant_torus(std::span<const MechanicalSystem1D> systems, double e,
                             const ResonanceVector& b, const TorusOptions& options) {
  const std::size_t d = systems.size();
  if (d == 0 || b.size() != d)
    throw DomainError("resonance " + to_string(b.components()) + " does not match dimension " +
                      std::to_string(d));
  if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("torus energy must be positive");

  ResonantTorus T{b, e, options.margin.value_or(default_margin(e)), {}, {}, {}, {}};
  if (d == 1)
    T.energies = {e};
  else if (d == 2)
    T.energies = split_two(systems, e, b);
  else
    T.energies = split_by_frequency(systems, e, b);

  for (std::size_t i = 0; i < d; ++i) {
    const double E = T.energies[i];
    if (!(E > 0.0))
      throw InfeasibleResonance("resonance " + to_string(b.components()) + ": axis " +
                                std::to_string(i + 1) + " has no rotating energy");
    const double sgn = b[i] > 0 ? 1.0 : -1.0;
    T.c.push_back(sgn * action(systems[i], E));
    T.omega.push_back(sgn * frequency(systems[i], E));
    const double flat = systems[i].separatrix_action();
    if (!(std::abs(T.c[i]) > flat + T.margin))
      throw InfeasibleResonance("resonance " + to_string(b.components()) + ": |c_" +
                                std::to_string(i + 1) + "| = " + std::to_string(std::abs(T.c[i])) +
                                " does not clear the flat region " + std::to_string(flat) +
                                " by the margin " + std::to_string(T.margin));
  }
  T.charts.reserve(d);
  for (std::size_t i = 0; i < d; ++i)
    T.charts.emplace_back(systems[i], T.energies[i], Branch::Plus, options.chart_cells);
  return T;
}

// ---------------------------------------------------------------------------
// Averages along one orbit

namespace {

template <class T, class F>
T orbit_average(const ResonantTorus& torus, std::span<const double> theta0,
                const AverageOptions& opt, F&& f) {
  if (theta0.size() != torus.dimension())
    throw DomainError("theta0 has dimension " + std::to_string(theta0.size()) + ", torus has " +
                      std::to_string(torus.dimension()));
  std::size_t n = opt.nodes_per_unit * static_cast<std::size_t>(torus.b.max_abs());
  T sum{};
  for (std::size_t j = 0; j < n; ++j)
    sum += f(torus.position(theta0, static_cast<double>(j) / static_cast<double>(n)));
  T prev = sum / static_cast<double>(n);
  while (n < opt.max_nodes) {
    T mid{};
    for (std::size_t j = 0; j < n; ++j)
      mid += f(torus.position(theta0, (static_cast<double>(j) + 0.5) / static_cast<double>(n)));
    sum += mid;
    n *= 2;
    const T cur = sum / static_cast<double>(n);
    const bool done = std::abs(cur - prev) <= opt.tol;
    prev = cur;
    if (done) break;
  }
  return prev;
}

}  // namespace

double average_along_torus(const TorusPotential& U, const ResonantTorus& torus,
                           std::span<const double> theta0, const AverageOptions& options) {
  if (U.dimension() != static_cast<int>(torus.dimension()))
    throw DomainError("potential and torus dimensions differ");
  return orbit_average<double>(torus, theta0, options,
                               [&U](const std::vector<double>& x) { return U.value(x); });
}

cplx average_mode(const ResonantTorus& torus, const Mode& k, std::span<const double> theta0,
                  const AverageOptions& options) {
  if (k.size() != torus.dimension()) throw DomainError("mode and torus dimensions differ");
  return orbit_average<cplx>(torus, theta0, options, [&k](const std::vector<double>& x) {
    double phase = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) phase += k[i] * x[i];
    return std::polar(1.0, kTwoPi * phase);
  });
}

// ---------------------------------------------------------------------------
// Grid averages

std::vector<double> GridAverages::grid_point(std::size_t flat_index) const {
  const std::size_t d = offset.size();
  std::vector<double> t(d);
  for (std::size_t i = d; i-- > 0;) {
    t[i] = offset[i] + static_cast<double>(flat_index % n) / static_cast<double>(n);
    flat_index /= n;
  }
  return t;
}

namespace {

struct Orbits {
  std::vector<std::vector<std::size_t>> start;  // per representative: grid multi-index
  std::vector<std::size_t> rep_of;              // flat grid index -> representative
};

Orbits grid_orbits(std::size_t n, const ResonanceVector& b) {
  const std::size_t d = b.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= n;
  Orbits o;
  o.rep_of.assign(total, total);
  std::vector<std::size_t> a(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (o.rep_of[flat] != total) continue;
    std::size_t f = flat;
    for (std::size_t i = d; i-- > 0;) {
      a[i] = f % n;
      f /= n;
    }
    const std::size_t id = o.start.size();
    o.start.push_back(a);
    std::vector<std::size_t> cur = a;
    while (true) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < d; ++i) idx = idx * n + cur[i];
      if (o.rep_of[idx] != total) break;
      o.rep_of[idx] = id;
      for (std::size_t i = 0; i < d; ++i) cur[i] = positive_mod(static_cast<long>(cur[i]) + b[i], n);
    }
  }
  return o;
}

std::map<Mode, std::vector<cplx>> grid_pass(const ResonantTorus& torus,
                                            const std::vector<Mode>& modes, std::size_t n,
                                            std::span<const double> offset, std::size_t N,
                                            const Orbits& orbits) {
  const std::size_t d = torus.dimension();
  const std::size_t stride = N / n;
  std::vector<std::vector<double>> X(d, std::vector<double>(N));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t m = 0; m < N; ++m)
      X[i][m] = torus.charts[i].position_of_angle(offset[i] + static_cast<double>(m) /
                                                                  static_cast<double>(N));

  std::map<std::pair<std::size_t, int>, std::vector<cplx>> phase;
  auto table = [&](std::size_t i, int k) -> const std::vector<cplx>& {
    auto [it, fresh] = phase.try_emplace({i, k});
    if (fresh) {
      it->second.resize(N);
      for (std::size_t m = 0; m < N; ++m) it->second[m] = std::polar(1.0, kTwoPi * k * X[i][m]);
    }
    return it->second;
  };

  std::vector<std::size_t> step(d);
  for (std::size_t i = 0; i < d; ++i) step[i] = positive_mod(torus.b[i], N);

  std::map<Mode, std::vector<cplx>> out;
  for (const Mode& k : modes) {
    std::vector<std::size_t> axes;
    std::vector<const std::vector<cplx>*> tabs;
    for (std::size_t i = 0; i < d; ++i)
      if (k[i] != 0) {
        axes.push_back(i);
        tabs.push_back(&table(i, k[i]));
      }
    std::vector<cplx> rep_value(orbits.start.size());
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t r = 0; r < orbits.start.size(); ++r) {
      for (std::size_t q = 0; q < axes.size(); ++q) idx[q] = orbits.start[r][axes[q]] * stride;
      cplx sum = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        cplx prod = 1.0;
        for (std::size_t q = 0; q < axes.size(); ++q) {
          prod *= (*tabs[q])[idx[q]];
          idx[q] += step[axes[q]];
          if (idx[q] >= N) idx[q] -= N;
        }
        sum += prod;
      }
      rep_value[r] = sum / static_cast<double>(N);
    }
    std::vector<cplx>& v = out[k];
    v.resize(orbits.rep_of.size());
    for (std::size_t flat = 0; flat < v.size(); ++flat) v[flat] = rep_value[orbits.rep_of[flat]];
  }
  return out;
}

}  // namespace

GridAverages average_modes_on_grid(const ResonantTorus& torus, const std::vector<Mode>& modes,
                                   std::size_t n, std::span<const double> offset,
                                   const AverageOptions& options) {
  const std::size_t d = torus.dimension();
  if (n == 0) throw DomainError("grid size must be positive");
  for (const Mode& k : modes)
    if (k.size() != d) throw DomainError("mode " + to_string(k) + " does not match dimension");
  GridAverages g;
  g.n = n;
  g.offset.assign(d, 0.0);
  if (!offset.empty()) {
    if (offset.size() != d) throw DomainError("grid offset does not match dimension");
    std::copy(offset.begin(), offset.end(), g.offset.begin());
  }
  const Orbits orbits = grid_orbits(n, torus.b);
  const std::size_t base = options.nodes_per_unit * static_cast<std::size_t>(torus.b.max_abs());
  std::size_t N = ((base + n - 1) / n) * n;
  auto prev = grid_pass(torus, modes, n, g.offset, N, orbits);
  while (true) {
    const std::size_t N2 = 2 * N;
    auto cur = grid_pass(torus, modes, n, g.offset, N2, orbits);
    double change = 0.0;
    for (const auto& [k, v] : cur) {
      const auto& p = prev.at(k);
      for (std::size_t j = 0; j < v.size(); ++j) change = std::max(change, std::abs(v[j] - p[j]));
    }
    N = N2;
    prev = std::move(cur);
    g.last_change = change;
    if (change <= options.tol || N >= options.max_nodes) break;
  }
  g.nodes = N;
  g.values = std::move(prev);
  return g;
}

// ---------------------------------------------------------------------------
// Angle means

cplx angle_moment(const ActionAngleChart& chart, int k, double tol) {
  if (k == 0) return 1.0;
  if (chart.system().is_free()) return 0.0;
  // theta'(x) dx pulls the angle integral back to position space.
  auto f = [&](double x) { return std::polar(chart.angle_derivative(x), kTwoPi * k * x); };
  std::size_t n = 256;
  cplx sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += f(static_cast<double>(j) / static_cast<double>(n));
  cplx prev = sum / static_cast<double>(n);
  while (n < (std::size_t{1} << 20)) {
    cplx mid = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      mid += f((static_cast<double>(j) + 0.5) / static_cast<double>(n));
    sum += mid;
    n *= 2;
    const cplx cur = sum / static_cast<double>(n);
    const bool done = std::abs(cur - prev) <= tol;
    prev = cur;
    if (done) break;
  }
  const double s = chart.branch() == Branch::Plus ? 1.0 : -1.0;
  return s * prev;
}

double angle_mean(const TorusPotential& U, const ResonantTorus& torus) {
  if (U.dimension() != static_cast<int>(torus.dimension()))
    throw DomainError("potential and torus dimensions differ");
  std::map<std::pair<std::size_t, int>, cplx> cache;
  cplx total = 0.0;
  for (const auto& [k, v] : U.coefficients()) {
    cplx term = v;
    for (std::size_t i = 0; i < k.size() && term != 0.0; ++i) {
      auto [it, fresh] = cache.try_emplace({i, k[i]});
      if (fresh) it->second = angle_moment(torus.charts[i], k[i]);
      term *= it->second;
    }
    total += term;
  }
  return total.real();
}

std::set<Mode> annihilation_flags(const TorusPotential& U, const ResonanceVector& b,
                                  double amplitude_tol) {
  if (U.dimension() != static_cast<int>(b.size()))
    throw DomainError("potential and resonance dimensions differ");
  std::set<Mode> out;
  for (const auto& [k, v] : U.coefficients())
    if (std::abs(v) > amplitude_tol && nonzero_count(k) >= 2 && dot(k, b.components()) == 0)
      out.insert(k);
  return out;
}

// ---------------------------------------------------------------------------
// Separability test

namespace {

ResonanceRecord evaluate_resonance(const TorusPotential& Uns,
                                   const std::set<Mode>& nonsingular,
                                   std::span<const MechanicalSystem1D> systems, double e,
                                   const ResonanceVector& b, const SeparabilityOptions& opt,
                                   std::span<const double> offset) {
  ResonanceRecord rec;
  rec.b = b;
  rec.annihilated = annihilation_flags(Uns, b, opt.amplitude_tol);
  std::optional<ResonantTorus> torus;
  try {
    torus.emplace(resonant_torus(systems, e, b, opt.torus));
  } catch (const InfeasibleResonance& err) {
    rec.reason = err.what();
    return rec;
  }
  rec.feasible = true;
  rec.energies = torus->energies;
  rec.c = torus->c;
  rec.omega = torus->omega;

  std::vector<Mode> reps;
  for (const Mode& k : nonsingular)
    if (is_representative(k)) reps.push_back(k);
  const GridAverages avg = average_modes_on_grid(*torus, reps, opt.grid_n, offset, opt.average);
  rec.nodes = avg.nodes;

  std::size_t total = 1;
  for (std::size_t i = 0; i < torus->dimension(); ++i) total *= opt.grid_n;
  std::vector<double> residual(total, 0.0);
  for (const Mode& k : reps) {
    const cplx uk = Uns.coefficient(k);
    cplx mk = 1.0;
    for (std::size_t i = 0; i < k.size(); ++i) mk *= angle_moment(torus->charts[i], k[i]);
    const auto& a = avg.values.at(k);
    double worst = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      const double r = 2.0 * (uk * (a[j] - mk)).real();
      residual[j] += r;
      worst = std::max(worst, std::abs(r));
    }
    rec.mode_residuals[k] = worst;
    rec.mode_residuals[negated(k)] = worst;
    if (worst > opt.residual_tol) {
      rec.flagged_modes.insert(k);
      rec.flagged_modes.insert(negated(k));
    }
  }
  for (double r : residual) rec.max_residual = std::max(rec.max_residual, std::abs(r));
  return rec;
}

}  // namespace

SeparabilityReport separability_test(const TorusPotential& U,
                                     std::span<const MechanicalSystem1D> systems, double e,
                                     const SeparabilityOptions& options) {
  if (U.dimension() != static_cast<int>(systems.size()))
    throw DomainError("potential has dimension " + std::to_string(U.dimension()) + " but " +
                      std::to_string(systems.size()) + " axes were given");
  if (options.grid_n == 0) throw DomainError("theta grid size must be positive");
  if (!(options.residual_tol > 0.0)) throw DomainError("residual tolerance must be positive");

  const SpectrumSets sets = spectrum_sets(U, options.amplitude_tol);
  const TorusPotential Uns = U - separable_part(U);
  const std::vector<ResonanceVector> bs(sets.coprime_orthogonal.begin(),
                                        sets.coprime_orthogonal.end());

  const std::size_t d = systems.size();
  std::vector<std::vector<double>> offsets(bs.size(), std::vector<double>(d, 0.0));
  if (options.seed) {
    std::mt19937_64 rng(*options.seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0 / static_cast<double>(options.grid_n));
    for (auto& o : offsets)
      for (double& t : o) t = jitter(rng);
  }

  SeparabilityReport rep;
  rep.nonsingular = sets.nonsingular;
  rep.grid_n = options.grid_n;
  rep.residual_tol = options.residual_tol;
  rep.records.resize(bs.size());
  parallel_for(bs.size(), options.threads, [&](std::size_t j) {
    rep.records[j] =
        evaluate_resonance(Uns, sets.nonsingular, systems, e, bs[j], options, offsets[j]);
  });

  std::set<Mode> covered;
  for (const auto& r : rep.records) {
    if (!r.feasible) continue;
    rep.obstructions.insert(r.flagged_modes.begin(), r.flagged_modes.end());
    covered.insert(r.annihilated.begin(), r.annihilated.end());
  }
  for (const Mode& k : rep.nonsingular)
    if (!covered.count(k)) rep.untested.insert(k);

  if (!rep.obstructions.empty())
    rep.verdict = "obstruction";
  else if (rep.untested.empty())
    rep.verdict = "separable-consistent";
  else
    rep.verdict = "inconclusive";
  return rep;
}

nlohmann::json mode_to_json(const Mode& k) { return nlohmann::json(k); }

nlohmann::json to_json(const SeparabilityReport& report) {
  using nlohmann::json;
  auto modes = [](const std::set<Mode>& s) {
    json a = json::array();
    for (const Mode& k : s) a.push_back(mode_to_json(k));
    return a;
  };
  json records = json::array();
  for (const auto& r : report.records) {
    json j{{"b", r.b.components()},
           {"feasible", r.feasible},
           {"annihilated_modes", modes(r.annihilated)}};
    if (r.feasible) {
      j["energies"] = r.energies;
      j["c"] = r.c;
      j["omega"] = r.omega;
      j["max_residual"] = r.max_residual;
      j["flagged_modes"] = modes(r.flagged_modes);
      j["quadrature_nodes"] = r.nodes;
    } else {
      j["reason"] = r.reason;
      j["flagged_modes"] = json::array();
    }
    records.push_back(std::move(j));
  }
  return json{{"verdict", report.verdict},
              {"grid_n", report.grid_n},
              {"residual_tol", report.residual_tol},
              {"nonsingular_modes", modes(report.nonsingular)},
              {"obstructions", modes(report.obstructions)},
              {"untested_modes", modes(report.untested)},
              {"resonances", std::move(records)}};
}

}  // namespace rigidity
