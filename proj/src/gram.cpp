#include "rigidity/gram.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include "rigidity/errors.hpp"
#include "rigidity/parallel.hpp"
#include "rigidity/spectral.hpp"

namespace rigidity {

cplx mode_function(const ResonantTorus& torus, const Mode& k, std::span<const double> theta0,
                   const AverageOptions& options) {
  return average_mode(torus, k, theta0, options);
}

std::vector<ResonanceVector> gram_resonances(std::span<const int> degrees,
                                             std::optional<int> fixed_k1) {
  if (degrees.size() != 2) throw DomainError("Gram matrices are implemented for d = 2");
  std::set<ResonanceVector> out;
  auto add = [&](int k1, int k2) {
    const Mode p = primitive(Mode{k2, -k1});
    out.insert(ResonanceVector(p));
    out.insert(-ResonanceVector(p));
  };
  for (int k2 = -degrees[1]; k2 <= degrees[1]; ++k2) {
    if (k2 == 0) continue;
    if (fixed_k1) {
      add(*fixed_k1, k2);
      continue;
    }
    for (int k1 = -degrees[0]; k1 <= degrees[0]; ++k1)
      if (k1 != 0) add(k1, k2);
  }
  return {out.begin(), out.end()};
}

namespace {

std::vector<Mode> gram_indices(std::span<const int> degrees, std::optional<int> fixed_k1) {
  std::vector<Mode> idx;
  std::vector<int> k1s;
  if (fixed_k1)
    k1s = {*fixed_k1};
  else
    for (int k1 = -degrees[0]; k1 <= degrees[0]; ++k1)
      if (k1 != 0) k1s.push_back(k1);
  for (int k1 : k1s)
    for (int k2 = -degrees[1]; k2 <= degrees[1]; ++k2)
      if (k2 != 0) idx.push_back({k1, k2});
  return idx;
}

using FourierTable = std::map<std::pair<long, long>, std::vector<cplx>>;

// Fourier coefficients in theta0 of one resonance's mode functions: only
// frequencies l = s (b_2, -b_1) survive the t-integration.
FourierTable spectral_contribution(const ResonantTorus& torus, const std::vector<Mode>& indices,
                                   double tol, double& change) {
  std::vector<int> k1s, k2s;
  for (const Mode& k : indices) {
    k1s.push_back(k[0]);
    k2s.push_back(k[1]);
  }
  const auto s1 = spectral::chart_mode_spectra(torus.charts[0], k1s, tol);
  const auto s2 = spectral::chart_mode_spectra(torus.charts[1], k2s, tol);
  change = 0.0;
  for (const auto* s : {&s1, &s2})
    for (const auto& [k, m] : *s) change = std::max(change, m.change);

  const long n = torus.b[0], m = torus.b[1];
  FourierTable F;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& a1 = s1.at(indices[r][0]);
    const auto& a2 = s2.at(indices[r][1]);
    const long S = std::min(a1.band() / std::abs(m), a2.band() / std::abs(n));
    for (long s = -S; s <= S; ++s) {
      const long l1 = s * m, l2 = -s * n;
      const cplx v = a1.at(l1) * a2.at(l2);
      if (v == 0.0) continue;
      auto [it, fresh] = F.try_emplace({l1, l2});
      if (fresh) it->second.assign(indices.size(), 0.0);
      it->second[r] += v;
    }
  }
  return F;
}

Eigen::MatrixXcd gram_from_fourier(const FourierTable& F, std::size_t n) {
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<long>(n), static_cast<long>(n));
  for (const auto& [l, f] : F) {
    const Eigen::Map<const Eigen::VectorXcd> v(f.data(), static_cast<long>(n));
    G += v.conjugate() * v.transpose();
  }
  return G;
}

struct QuadratureGram {
  Eigen::MatrixXcd G;
  double asymmetry = 0.0;
};

QuadratureGram quadrature_gram(const std::vector<ResonantTorus>& tori,
                               const std::vector<Mode>& indices, std::size_t n, bool fixed_k1,
                               unsigned threads) {
  const std::size_t points = fixed_k1 ? n : n * n;
  std::vector<std::vector<std::vector<cplx>>> per_b(tori.size());
  parallel_for(tori.size(), threads, [&](std::size_t j) {
    const auto g = average_modes_on_grid(tori[j], indices, n);
    auto& out = per_b[j];
    out.assign(indices.size(), std::vector<cplx>(points));
    for (std::size_t r = 0; r < indices.size(); ++r) {
      const auto& v = g.values.at(indices[r]);
      for (std::size_t p = 0; p < points; ++p) out[r][p] = v[p];  // slice theta0^1 = 0 when fixed
    }
  });
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(static_cast<long>(points), static_cast<long>(indices.size()));
  for (const auto& b : per_b)
    for (std::size_t r = 0; r < indices.size(); ++r)
      for (std::size_t p = 0; p < points; ++p) f(static_cast<long>(p), static_cast<long>(r)) += b[r][p];
  QuadratureGram q;
  q.G = f.adjoint() * f / static_cast<double>(points);
  const Eigen::MatrixXcd H = q.G.adjoint();
  q.asymmetry = 0.5 * (q.G - H).cwiseAbs().maxCoeff();
  q.G = 0.5 * (q.G + H);
  return q;
}

}  // namespace

GramReport gram_matrix(std::span<const int> degrees, std::span<const MechanicalSystem1D> systems,
                       double e, const GramOptions& options) {
  if (degrees.size() != 2 || systems.size() != 2)
    throw DomainError("Gram matrices are implemented for d = 2");
  for (int deg : degrees)
    if (deg < 1) throw DomainError("axis degrees must be at least 1");
  if (options.fixed_k1) {
    if (*options.fixed_k1 == 0) throw DomainError("fixed_k1 must be nonzero");
    if (!systems[0].is_free())
      throw DomainError("the fixed-k1 family requires a free first axis (mu_1 = 0)");
  }

  GramReport rep;
  rep.axis_degrees.assign(degrees.begin(), degrees.end());
  for (const auto& s : systems) rep.mu.push_back(s.mu());
  rep.fixed_k1 = options.fixed_k1;
  rep.indices = gram_indices(degrees, options.fixed_k1);

  const auto bs = gram_resonances(degrees, options.fixed_k1);
  std::vector<std::optional<ResonantTorus>> tori(bs.size());
  rep.resonances.resize(bs.size());
  parallel_for(bs.size(), options.threads, [&](std::size_t j) {
    auto& r = rep.resonances[j];
    r.b = bs[j];
    try {
      tori[j].emplace(resonant_torus(systems, e, bs[j], options.torus));
      r.feasible = true;
      r.c = tori[j]->c;
      r.omega = tori[j]->omega;
    } catch (const InfeasibleResonance& err) {
      r.reason = err.what();
    }
  });
  std::vector<ResonantTorus> feasible;
  for (auto& t : tori)
    if (t) feasible.push_back(std::move(*t));
  if (feasible.empty())
    throw DomainError("every resonance of the degree box is infeasible at e = " + std::to_string(e));

  const std::size_t n = rep.indices.size();
  if (options.method == GramMethod::Spectral) {
    std::vector<FourierTable> parts(feasible.size());
    std::vector<double> changes(feasible.size());
    parallel_for(feasible.size(), options.threads, [&](std::size_t j) {
      parts[j] = spectral_contribution(feasible[j], rep.indices, options.spectral_tol, changes[j]);
    });
    FourierTable F;
    for (const auto& p : parts)
      for (const auto& [l, v] : p) {
        auto [it, fresh] = F.try_emplace(l, v);
        if (!fresh)
          for (std::size_t r = 0; r < n; ++r) it->second[r] += v[r];
      }
    rep.matrix = gram_from_fourier(F, n);
    const double change = *std::max_element(changes.begin(), changes.end());
    rep.quadrature_error_estimate = 4.0 * static_cast<double>(feasible.size()) * change;
  } else {
    const int deg = std::max(degrees[0], degrees[1]);
    std::size_t grid = 8 * static_cast<std::size_t>(2 * deg + 1);
    auto q = quadrature_gram(feasible, rep.indices, grid, options.fixed_k1.has_value(), options.threads);
    double change = 0.0;
    for (int doubling = 0; doubling < 3; ++doubling) {
      grid *= 2;
      auto q2 = quadrature_gram(feasible, rep.indices, grid, options.fixed_k1.has_value(), options.threads);
      change = (q2.G - q.G).cwiseAbs().maxCoeff();
      q = std::move(q2);
      if (change <= options.quadrature_tol) break;
    }
    rep.matrix = q.G;
    rep.quadrature_error_estimate = std::max(q.asymmetry, change);
  }
  full_rank_certificate(rep, options.rank_tol);
  return rep;
}

bool full_rank_certificate(GramReport& report, double rank_tol) {
  const Eigen::MatrixXcd& G = report.matrix;
  report.rank_tol = rank_tol;
  if (G.size() == 0) {
    report.full_rank = false;
    return false;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  report.singular_values = svd.singularValues();
  report.max_singular_value = report.singular_values.maxCoeff();
  report.min_singular_value = report.singular_values.minCoeff();
  report.det = G.determinant();
  const Eigen::MatrixXcd H = 0.5 * (G + G.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = eig.eigenvalues().minCoeff();
  report.full_rank = report.min_singular_value > rank_tol * report.max_singular_value;
  return report.full_rank;
}

// ---------------------------------------------------------------------------
// mu sweep

SweepResult mu_sweep(std::span<const int> degrees, std::span<const PeriodicPotential1D> potentials,
                     double e, const std::vector<std::vector<double>>& mu_grid,
                     const GramOptions& options, double sigma_threshold) {
  if (mu_grid.empty()) throw DomainError("mu grid is empty");
  for (const auto& mu : mu_grid)
    if (mu.size() != potentials.size())
      throw DomainError("mu grid point has " + std::to_string(mu.size()) + " components, expected " +
                        std::to_string(potentials.size()));
  SweepResult res;
  res.sigma_threshold = sigma_threshold;
  res.rows.resize(mu_grid.size());
  GramOptions inner = options;
  inner.threads = 1;
  parallel_for(mu_grid.size(), options.threads, [&](std::size_t j) {
    SweepRow& row = res.rows[j];
    row.mu = mu_grid[j];
    std::vector<MechanicalSystem1D> systems;
    for (std::size_t i = 0; i < potentials.size(); ++i)
      systems.push_back(row.mu[i] == 0.0 ? MechanicalSystem1D::free()
                                         : MechanicalSystem1D(row.mu[i], potentials[i]));
    try {
      const auto g = gram_matrix(degrees, systems, e, inner);
      row.det = g.det;
      row.sigma_min = g.min_singular_value;
      row.full_rank = g.full_rank;
    } catch (const DomainError&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.det = {nan, nan};
      row.sigma_min = nan;
      row.full_rank = false;
    }
  });

  for (std::size_t i = 0; i < potentials.size(); ++i)
    for (const auto& row : res.rows)
      if (row.mu[i] != res.rows.front().mu[i]) {
        res.varying_axes.push_back(static_cast<int>(i));
        break;
      }
  for (std::size_t j = 0; j + 1 < res.rows.size(); ++j) {
    const auto& a = res.rows[j];
    const auto& b = res.rows[j + 1];
    const bool sign_change = a.det.real() * b.det.real() < 0.0;
    const bool dip = b.sigma_min < sigma_threshold && !(a.sigma_min < sigma_threshold);
    if (sign_change || dip) res.candidate_brackets.emplace_back(j, j + 1);
  }
  for (const auto& row : res.rows) {
    if (!(row.sigma_min > sigma_threshold)) break;
    res.measured_threshold = *std::max_element(row.mu.begin(), row.mu.end());
  }
  return res;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& os) {
  const bool single = sweep.varying_axes.size() == 1;
  const std::size_t d = sweep.rows.empty() ? 0 : sweep.rows.front().mu.size();
  if (single) {
    os << "mu";
  } else {
    for (std::size_t i = 0; i < d; ++i) os << (i ? "," : "") << "mu" << i + 1;
  }
  os << ",detG_re,detG_im,sigma_min,full_rank\n" << std::setprecision(17);
  for (const auto& r : sweep.rows) {
    if (single) {
      os << r.mu[static_cast<std::size_t>(sweep.varying_axes.front())];
    } else {
      for (std::size_t i = 0; i < d; ++i) os << (i ? "," : "") << r.mu[i];
    }
    os << ',' << r.det.real() << ',' << r.det.imag() << ',' << r.sigma_min << ','
       << (r.full_rank ? "true" : "false") << '\n';
  }
}

nlohmann::json to_json(const GramReport& report) {
  using nlohmann::json;
  json re = json::array(), im = json::array();
  for (long i = 0; i < report.matrix.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (long j = 0; j < report.matrix.cols(); ++j) {
      rr.push_back(report.matrix(i, j).real());
      ri.push_back(report.matrix(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  json res = json::array();
  for (const auto& r : report.resonances) {
    json j{{"b", r.b.components()}, {"feasible", r.feasible}};
    if (r.feasible) {
      j["c"] = r.c;
      j["omega"] = r.omega;
    } else {
      j["reason"] = r.reason;
    }
    res.push_back(std::move(j));
  }
  std::vector<double> sv(report.singular_values.data(),
                         report.singular_values.data() + report.singular_values.size());
  json out{{"axis_degrees", report.axis_degrees},
           {"mu", report.mu},
           {"indices", report.indices},
           {"matrix_re", std::move(re)},
           {"matrix_im", std::move(im)},
           {"det", {report.det.real(), report.det.imag()}},
           {"singular_values", sv},
           {"min_singular_value", report.min_singular_value},
           {"min_eigenvalue", report.min_eigenvalue},
           {"full_rank", report.full_rank},
           {"rank_tol", report.rank_tol},
           {"quadrature_error_estimate", report.quadrature_error_estimate},
           {"resonances", std::move(res)}};
  if (report.fixed_k1) out["fixed_k1"] = *report.fixed_k1;
  return out;
}

nlohmann::json to_json(const SweepResult& sweep) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& r : sweep.rows)
    rows.push_back({{"mu", r.mu},
                    {"detG", {r.det.real(), r.det.imag()}},
                    {"sigma_min", r.sigma_min},
                    {"full_rank", r.full_rank}});
  json br = json::array();
  for (const auto& [a, b] : sweep.candidate_brackets) br.push_back({sweep.rows[a].mu, sweep.rows[b].mu});
  json out{{"rows", rows}, {"candidate_brackets", br}, {"sigma_threshold", sweep.sigma_threshold}};
  out["measured_threshold"] = sweep.measured_threshold ? json(*sweep.measured_threshold) : json(nullptr);
  return out;
}

}  // namespace rigidity
