#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rigidity/action_angle.hpp"
#include "rigidity/averaging.hpp"
#include "rigidity/config.hpp"
#include "rigidity/elliptic.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/flow.hpp"
#include "rigidity/gram.hpp"
#include "rigidity/hje.hpp"
#include "rigidity/mather.hpp"

namespace fs = std::filesystem;
using namespace rigidity;
using config::Section;
using nlohmann::json;

namespace {

constexpr int kExitDomain = 2;
constexpr int kExitConfig = 3;

struct Globals {
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 0;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
};

class Run {
 public:
  explicit Run(const Globals& g) : g_(g) {
    if (g.config_path.empty()) throw ConfigError("--config: a scenario file is required");
    doc_ = config::load_file(g.config_path);
    root_.emplace(doc_, "");
  }

  const Section& root() const { return *root_; }
  Section section(const std::string& name) const {
    return root_->has(name) ? root_->table(name) : Section(empty_, name);
  }
  const Globals& globals() const { return g_; }

  std::vector<MechanicalSystem1D> systems() const { return config::systems_from(*root_); }

  void emit(const Section& s, const std::string& fallback, const std::string& content) const {
    const fs::path dir(g_.out_dir);
    const fs::path path = dir / s.string("output", fallback);
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(s.field("output") + ": cannot write " + path.string());
    out << content;
    std::cout << "wrote " << path.string() << "\n";
  }

 private:
  Globals g_;
  json doc_;
  json empty_ = json::object();
  std::optional<Section> root_;
};

std::size_t axis_of(const Section& s, std::size_t d) {
  const long axis = s.integer("axis", 1);
  if (axis < 1 || static_cast<std::size_t>(axis) > d)
    throw ConfigError(s.field("axis") + ": must lie in 1.." + std::to_string(d));
  return static_cast<std::size_t>(axis - 1);
}

int cmd_aa_chart(const Run& run) {
  const auto sys = run.systems();
  const Section s = run.section("aa_chart");
  const auto i = axis_of(s, sys.size());
  const double E = s.positive("energy");
  const long cells = s.integer("cells", 256);
  if (cells < 8) throw ConfigError(s.field("cells") + ": must be at least 8");
  const std::string br = s.string("branch", "+");
  if (br != "+" && br != "-") throw ConfigError(s.field("branch") + ": expected \"+\" or \"-\"");
  const ActionAngleChart chart(sys[i], E, br == "+" ? Branch::Plus : Branch::Minus, static_cast<int>(cells));
  std::ostringstream os;
  write_chart_csv(chart, os);
  run.emit(s, "aa_chart.csv", os.str());
  return 0;
}

int cmd_alpha(const Run& run) {
  const auto sys = run.systems();
  const Section s = run.section("alpha");
  const auto i = axis_of(s, sys.size());
  const double lo = s.number("c_min", -2.0);
  const double hi = s.number("c_max", 2.0);
  if (!(hi > lo)) throw ConfigError(s.field("c_max") + ": must exceed c_min");
  const long n = s.integer("points", 401);
  if (n < 2) throw ConfigError(s.field("points") + ": must be at least 2");
  std::ostringstream os;
  write_alpha_csv(AlphaFunction1D(sys[i]), lo, hi, static_cast<int>(n), os);
  run.emit(s, "alpha.csv", os.str());
  return 0;
}

int cmd_average(const Run& run) {
  const auto sys = run.systems();
  const auto U = config::perturbation_from(run.root(), static_cast<int>(sys.size()));
  const Section s = run.section("average");
  SeparabilityOptions opt;
  opt.grid_n = static_cast<std::size_t>(s.integer("grid_n", 32));
  if (opt.grid_n == 0) throw ConfigError(s.field("grid_n") + ": must be positive");
  opt.residual_tol = run.globals().tol.value_or(s.positive("residual_tol", 1e-8));
  opt.amplitude_tol = s.number("amplitude_tol", 0.0);
  if (s.has("margin")) opt.torus.margin = s.positive("margin");
  opt.threads = run.globals().threads;
  opt.seed = run.globals().seed;
  const auto report = separability_test(U, sys, s.positive("energy"), opt);
  run.emit(s, "average.json", to_json(report).dump(2) + "\n");
  return 0;
}

GramOptions gram_options(const Run& run, const Section& s) {
  GramOptions opt;
  if (s.has("fixed_k1")) opt.fixed_k1 = static_cast<int>(s.integer("fixed_k1"));
  opt.rank_tol = run.globals().tol.value_or(s.positive("rank_tol", 1e-8));
  const std::string method = s.string("method", "spectral");
  if (method == "spectral")
    opt.method = GramMethod::Spectral;
  else if (method == "quadrature")
    opt.method = GramMethod::Quadrature;
  else
    throw ConfigError(s.field("method") + ": expected \"spectral\" or \"quadrature\"");
  if (s.has("margin")) opt.torus.margin = s.positive("margin");
  opt.threads = run.globals().threads;
  return opt;
}

int cmd_gram(const Run& run) {
  const auto sys = run.systems();
  const Section s = run.section("gram");
  const auto degrees = s.integers("degrees");
  const auto report = gram_matrix(degrees, sys, s.positive("energy"), gram_options(run, s));
  run.emit(s, "gram.json", to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_mu_sweep(const Run& run) {
  const auto pots = config::potentials_from(run.root());
  const auto base = run.root().table("system").numbers("mu");
  const Section s = run.section("mu_sweep");
  std::vector<std::vector<double>> grid;
  if (s.has("grid")) {
    const json& g = s.raw("grid");
    if (!g.is_array()) throw ConfigError(s.field("grid") + ": expected an array of mu vectors");
    for (std::size_t r = 0; r < g.size(); ++r) {
      const std::string f = s.field("grid") + "[" + std::to_string(r) + "]";
      if (!g[r].is_array() || g[r].size() != base.size())
        throw ConfigError(f + ": expected " + std::to_string(base.size()) + " numbers");
      std::vector<double> mu;
      for (const auto& v : g[r]) {
        if (!v.is_number() || v.get<double>() < 0.0) throw ConfigError(f + ": entries must be numbers >= 0");
        mu.push_back(v.get<double>());
      }
      grid.push_back(std::move(mu));
    }
  } else {
    const auto i = axis_of(s, base.size());
    const double lo = s.number("mu_min", 0.0);
    const double hi = s.number("mu_max");
    const long steps = s.integer("steps", 11);
    if (lo < 0.0) throw ConfigError(s.field("mu_min") + ": must be >= 0");
    if (!(hi >= lo)) throw ConfigError(s.field("mu_max") + ": must be >= mu_min");
    if (steps < 1) throw ConfigError(s.field("steps") + ": must be at least 1");
    for (long j = 0; j < steps; ++j) {
      auto mu = base;
      mu[i] = steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(steps - 1);
      grid.push_back(std::move(mu));
    }
  }
  const auto degrees = s.integers("degrees");
  const auto sweep = mu_sweep(degrees, pots, s.positive("energy"), grid, gram_options(run, s),
                              s.positive("sigma_threshold", 2.0));
  std::ostringstream os;
  write_sweep_csv(sweep, os);
  run.emit(s, "mu_sweep.csv", os.str());
  return 0;
}

int cmd_hje(const Run& run) {
  const auto sys = run.systems();
  const int d = static_cast<int>(sys.size());
  const auto U = config::perturbation_from(run.root(), d);
  const Section s = run.section("hje");
  json out;
  if (s.has("c")) {
    const auto c = s.numbers("c");
    if (static_cast<int>(c.size()) != d) throw ConfigError(s.field("c") + ": needs one entry per axis");
    const double eps = s.number("epsilon", 1e-3);
    const auto sol = lindstedt_first_order(sys, U, c, eps);
    const long grid = s.integer("defect_grid", 16);
    if (grid < 1) throw ConfigError(s.field("defect_grid") + ": must be positive");
    out = to_json(sol.first_order);
    out["c"] = sol.c;
    out["energies"] = sol.energies;
    out["epsilon"] = sol.epsilon;
    out["alpha0"] = sol.alpha0;
    out["alpha_eps"] = sol.alpha_eps;
    out["defect"] = lindstedt_defect(sol, static_cast<std::size_t>(grid));
  } else {
    const auto omega = s.numbers("omega");
    if (static_cast<int>(omega.size()) != d) throw ConfigError(s.field("omega") + ": needs one entry per axis");
    std::optional<double> rtol = run.globals().tol;
    if (!rtol && s.has("resonance_tol")) rtol = s.positive("resonance_tol");
    const auto sol = solve_first_order(U, omega, rtol);
    out = to_json(sol);
    out["transport_residual"] = transport_residual(sol, U, static_cast<std::size_t>(s.integer("residual_grid", 32)));
  }
  run.emit(s, "hje.json", out.dump(2) + "\n");
  return 0;
}

int cmd_flow(const Run& run) {
  const auto sys = run.systems();
  const int d = static_cast<int>(sys.size());
  const auto U = config::perturbation_from(run.root(), d);
  const Section s = run.section("flow");
  PhaseState s0{s.numbers("x0"), s.numbers("p0")};
  if (static_cast<int>(s0.x.size()) != d) throw ConfigError(s.field("x0") + ": needs one entry per axis");
  if (static_cast<int>(s0.p.size()) != d) throw ConfigError(s.field("p0") + ": needs one entry per axis");
  FlowOptions opt;
  const long stride = s.integer("stride", 1);
  if (stride < 1) throw ConfigError(s.field("stride") + ": must be positive");
  opt.record_stride = static_cast<std::size_t>(stride);
  const std::string method = s.string("integrator", "verlet");
  if (method == "verlet")
    opt.method = Integrator::Verlet;
  else if (method == "yoshida4")
    opt.method = Integrator::Yoshida4;
  else
    throw ConfigError(s.field("integrator") + ": expected \"verlet\" or \"yoshida4\"");
  const auto tr = integrate(sys, U, s.number("epsilon", 0.0), s0, s.positive("h", 1e-3), s.positive("T"), opt);
  std::ostringstream os;
  write_trajectory_csv(tr, os);
  run.emit(s, "flow.csv", os.str());
  return 0;
}

// Quick cross-module oracle suite.
int cmd_selfcheck(const Globals& g) {
  struct Check {
    std::string name;
    double tol;
    std::function<double()> measure;
  };
  const double tol_scale = g.tol.value_or(1.0);
  const auto flat = std::vector<MechanicalSystem1D>{MechanicalSystem1D::free(), MechanicalSystem1D::free()};
  const std::vector<Check> checks{
      {"elliptic-vs-quadrature chart", 1e-8,
       [] {
         const ActionAngleChart chart(MechanicalSystem1D::pendulum(0.2), 1.0);
         double worst = 0.0;
         for (int j = 0; j <= 100; ++j) {
           const double x = j / 100.0;
           double d = chart.angle_of_position(x) - pendulum_angle(x, 0.2, 1.0);
           worst = std::max(worst, std::abs(d - std::round(d)));
         }
         return worst;
       }},
      {"alpha flat edge 0.5*(4/pi)", 1e-8,
       [] { return std::abs(AlphaFunction1D(MechanicalSystem1D::pendulum(0.25)).c_flat() - 2.0 / std::numbers::pi); }},
      {"flat annihilation k=(2,-1) b=(1,2)", 1e-10,
       [&] {
         const auto T = resonant_torus(flat, 1.0, ResonanceVector({1, 2}));
         const std::vector<double> th{0.3, 0.7};
         const cplx expect = std::polar(1.0, 2.0 * std::numbers::pi * (2 * 0.3 - 0.7));
         return std::abs(average_mode(T, {2, -1}, th) - expect) + std::abs(average_mode(T, {1, 1}, th));
       }},
      {"flat Gram equals 4I, deg (2,2)", 1e-8,
       [&] {
         const std::vector<int> deg{2, 2};
         const auto G = gram_matrix(deg, flat, 4.0);
         const Eigen::MatrixXcd D = G.matrix - 4.0 * Eigen::MatrixXcd::Identity(G.matrix.rows(), G.matrix.cols());
         return D.cwiseAbs().maxCoeff();
       }},
      {"transport residual omega=(1,sqrt2)", 1e-10,
       [] {
         const auto U = TorusPotential::trig(2, {1, 1}, 1.0) + TorusPotential::trig(2, {2, -3}, 0.4, 0.1);
         const std::vector<double> w{1.0, std::numbers::sqrt2};
         return transport_residual(solve_first_order(U, w), U, 32);
       }},
      {"graph residual pendulum (0.1,0.2)", 1e-9,
       [] {
         const std::vector<MechanicalSystem1D> sys{MechanicalSystem1D::pendulum(0.1), MechanicalSystem1D::pendulum(0.2)};
         const std::vector<double> c{1.1, -0.9};
         double worst = 0.0;
         for (int a = 0; a < 32; ++a)
           for (int b = 0; b < 32; ++b) {
             const std::vector<double> x{a / 32.0, b / 32.0};
             worst = std::max(worst, std::abs(graph_residual(sys, c, x)));
           }
         return worst;
       }},
      {"flow F1 drift (Yoshida4, T=10)", 1e-8,
       [] {
         const std::vector<MechanicalSystem1D> sys{MechanicalSystem1D::pendulum(0.1), MechanicalSystem1D::pendulum(0.2)};
         const auto tr = integrate(sys, TorusPotential(2), 0.0, {{0.1, 0.2}, {1.0, 0.8}}, 1e-3, 10.0,
                                   {.method = Integrator::Yoshida4});
         double worst = 0.0;
         for (double f : tr.F1) worst = std::max(worst, std::abs(f - tr.F1.front()));
         return worst;
       }},
  };
  int failed = 0;
  for (const auto& c : checks) {
    const double tol = c.tol * tol_scale;
    double v = 0.0;
    std::string err;
    try {
      v = c.measure();
    } catch (const std::exception& e) {
      err = e.what();
    }
    const bool ok = err.empty() && v <= tol;
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << "  value=" << std::setprecision(3)
              << std::scientific << v << " tol=" << tol << std::defaultfloat;
    if (!err.empty()) std::cout << " error=" << err;
    std::cout << "\n";
  }
  std::cout << (failed == 0 ? "selfcheck passed" : "selfcheck failed") << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for deformations of integrable mechanical systems on tori"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Scenario file (.toml or .json)");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");
  app.add_option("--tol", g.tol, "Override the command's main tolerance");
  app.add_option("--seed", g.seed, "Seed for theta0 grid jitter");

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const Run&)> run;
  };
  const std::vector<Command> commands{
      {"aa-chart", "Action-angle table of one axis (CSV)", cmd_aa_chart},
      {"alpha", "Alpha-function profile of one axis (CSV)", cmd_alpha},
      {"average", "Separability test on resonant tori (JSON)", cmd_average},
      {"gram", "Gram matrix and full-rank certificate (JSON)", cmd_gram},
      {"mu-sweep", "Gram certificates along a coupling grid (CSV)", cmd_mu_sweep},
      {"hje", "First-order Hamilton-Jacobi solution (JSON)", cmd_hje},
      {"flow", "Symplectic trajectory (CSV)", cmd_flow},
  };
  std::function<int()> action;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help)->fallthrough();
    sub->callback([&, fn = c.run] { action = [&, fn] { return fn(Run(g)); }; });
  }
  app.add_subcommand("selfcheck", "Cross-module oracle suite")->fallthrough()->callback([&] {
    action = [&] { return cmd_selfcheck(g); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
