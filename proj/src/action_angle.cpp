#include "rigidity/action_angle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "rigidity/errors.hpp"
#include "rigidity/roots.hpp"

namespace rigidity {

namespace {

constexpr int kGrid = 4096;

double frac(double t) { return t - std::floor(t); }

void require_positive_energy(double E) {
  if (!(E > 0.0))
    throw DomainError("energy " + std::to_string(E) +
                      " is not on the rotating branch (E > 0 required)");
}

}  // namespace

// ---------------------------------------------------------------------------
// MechanicalSystem1D

MechanicalSystem1D::MechanicalSystem1D(double mu, PeriodicPotential1D V)
    : mu_(mu), V_(std::move(V)) {
  if (!(mu_ >= 0.0) || !std::isfinite(mu_))
    throw DomainError("coupling mu must be a finite nonnegative number");
  const double vmin = V_.min_value();
  const double scale = std::max(1.0, std::abs(V_.max_value()));
  if (std::abs(vmin) > 1e-9 * scale)
    throw DomainError("potential must be normalized to minimum 0 (found min " +
                      std::to_string(vmin) + ")");
  free_ = (mu_ == 0.0) || V_.is_constant();
  max_V_ = V_.max_value();

  if (V_.is_constant()) {
    wells_ = {0.0};
  } else {
    std::vector<double> v(kGrid);
    for (int j = 0; j < kGrid; ++j) v[j] = V_(static_cast<double>(j) / kGrid);
    const double h = 1.0 / kGrid;
    for (int j = 0; j < kGrid; ++j) {
      const double prev = v[(j + kGrid - 1) % kGrid], next = v[(j + 1) % kGrid];
      if (v[j] <= prev && v[j] < next) {
        const double x = quad::golden_section_min([this](double t) { return V_(t); }, (j - 1) * h,
                                                  (j + 1) * h);
        wells_.push_back(frac(x));
      }
    }
    if (wells_.empty()) wells_.push_back(V_.argmin());
    std::sort(wells_.begin(), wells_.end());
  }

  if (!V_.is_constant()) {
    auto f = [this](double x) { return std::sqrt(2.0 * std::max(V_(x), 0.0)); };
    const std::size_t n = wells_.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double a = wells_[j];
      const double b = (j + 1 < n) ? wells_[j + 1] : wells_[0] + 1.0;
      sep_const_ += quad::integrate_tanh_sinh(f, a, b);
    }
  }
}

double MechanicalSystem1D::separatrix_action() const { return std::sqrt(mu_) * sep_const_; }

// ---------------------------------------------------------------------------
// Full-period integrals

namespace {

double ratio_of(const MechanicalSystem1D& sys, double E) {
  const double s = sys.mu() * sys.max_potential();
  return s > 0.0 ? E / s : 1e300;
}

}  // namespace

double action(const MechanicalSystem1D& sys, double E) {
  require_positive_energy(E);
  if (sys.is_free()) return std::sqrt(2.0 * E);
  const double mu = sys.mu();
  const auto& V = sys.potential();
  return sys.period_integral([&](double x) { return std::sqrt(2.0 * (E + mu * std::max(V(x), 0.0))); },
                             ratio_of(sys, E));
}

double period(const MechanicalSystem1D& sys, double E) {
  require_positive_energy(E);
  if (sys.is_free()) return 1.0 / std::sqrt(2.0 * E);
  const double mu = sys.mu();
  const auto& V = sys.potential();
  return sys.period_integral(
      [&](double x) { return 1.0 / std::sqrt(2.0 * (E + mu * std::max(V(x), 0.0))); },
      ratio_of(sys, E));
}

double frequency(const MechanicalSystem1D& sys, double E) { return 1.0 / period(sys, E); }

double energy_of_action(const MechanicalSystem1D& sys, double I) {
  const double Imin = sys.separatrix_action();
  if (!(I > Imin))
    throw DomainError("action " + std::to_string(I) + " is not above the separatrix action " +
                      std::to_string(Imin));
  const double hi = 0.5 * I * I;
  if (sys.is_free()) return hi;
  auto g = [&](double E) { return action(sys, E) - I; };
  double lo = 0.25 * hi;
  while (g(lo) >= 0.0 && lo > 1e-290) lo *= 1.0 / 16.0;
  return solve_increasing(g, lo, hi);
}

double energy_of_frequency(const MechanicalSystem1D& sys, double omega) {
  if (!(omega > 0.0)) throw DomainError("frequency must be positive");
  const double hi = 0.5 * omega * omega;
  if (sys.is_free()) return hi;
  auto g = [&](double E) { return frequency(sys, E) - omega; };
  double lo = hi - sys.mu() * sys.max_potential();
  if (!(lo > 0.0) || g(lo) >= 0.0) {
    lo = 0.25 * hi;
    while (g(lo) >= 0.0 && lo > 1e-290) lo *= 1.0 / 16.0;
  }
  return solve_increasing(g, lo, hi);
}

// ---------------------------------------------------------------------------
// ActionAngleChart

ActionAngleChart::ActionAngleChart(const MechanicalSystem1D& sys, double E, Branch branch,
                                   int cells)
    : sys_(sys), E_(E), branch_(branch), cells_(cells) {
  require_positive_energy(E);
  if (cells_ < 1) throw DomainError("chart needs at least one cell");
  I_ = rigidity::action(sys_, E_);
  omega_ = rigidity::frequency(sys_, E_);
  if (sys_.is_free()) return;
  table_.assign(cells_ + 1, 0.0);
  const double h = 1.0 / cells_;
  auto w = [this](double x) { return weight(x); };
  for (int j = 0; j < cells_; ++j) table_[j + 1] = table_[j] + quad::integrate_gl(w, j * h, (j + 1) * h, 8);
  Z_ = table_[cells_];
  for (double& t : table_) t /= Z_;
  table_[cells_] = 1.0;
}

double ActionAngleChart::weight(double x) const {
  return 1.0 / std::sqrt(1.0 + sys_.mu() * std::max(sys_.potential()(x), 0.0) / E_);
}

double ActionAngleChart::plus_angle(double x) const {
  if (sys_.is_free()) return x;
  const int j = std::clamp(static_cast<int>(x * cells_), 0, cells_ - 1);
  const double a = static_cast<double>(j) / cells_;
  if (x == a) return table_[j];
  return table_[j] + quad::integrate_gl([this](double t) { return weight(t); }, a, x, 8) / Z_;
}

double ActionAngleChart::plus_position(double theta) const {
  if (sys_.is_free()) return theta;
  auto it = std::upper_bound(table_.begin(), table_.end(), theta);
  const int j = std::clamp(static_cast<int>(it - table_.begin()) - 1, 0, cells_ - 1);
  double lo = static_cast<double>(j) / cells_, hi = static_cast<double>(j + 1) / cells_;
  const double t0 = table_[j], t1 = table_[j + 1];
  double x = lo + (hi - lo) * (theta - t0) / (t1 - t0);
  for (int it2 = 0; it2 < 50; ++it2) {
    const double r = plus_angle(x) - theta;
    if (r > 0.0)
      hi = x;
    else
      lo = x;
    if (std::abs(r) <= 1e-16) break;
    double next = x - r * Z_ / weight(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 1e-17) break;
    x = next;
  }
  return x;
}

double ActionAngleChart::angle_of_position(double x) const {
  const double t = frac(plus_angle(frac(x)));
  if (branch_ == Branch::Plus) return t;
  return t == 0.0 ? 0.0 : 1.0 - t;
}

double ActionAngleChart::angle_derivative(double x) const {
  const double d = sys_.is_free() ? 1.0 : weight(frac(x)) / Z_;
  return branch_ == Branch::Plus ? d : -d;
}

double ActionAngleChart::position_of_angle(double theta) const {
  double t = frac(theta);
  if (branch_ == Branch::Minus && t != 0.0) t = 1.0 - t;
  if (t >= 1.0) t = 0.0;
  return frac(plus_position(t));
}

std::vector<double> ActionAngleChart::positions_on_grid(std::size_t n, double offset) const {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = position_of_angle(offset + static_cast<double>(j) / static_cast<double>(n));
  return out;
}

std::vector<ActionAngleChart::Sample> ActionAngleChart::samples() const {
  const int n = sys_.is_free() ? kGrid : cells_;
  std::vector<Sample> out(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double x = static_cast<double>(j) / n;
    double t = sys_.is_free() ? x : table_[j];
    if (branch_ == Branch::Minus) t = (j == 0) ? 0.0 : 1.0 - t;
    out[j] = {x, t, angle_derivative(x)};
  }
  return out;
}

double perturbation_gap(const ActionAngleChart& chart) {
  if (chart.system().is_free()) return 0.0;
  const ActionAngleChart plus =
      chart.branch() == Branch::Plus ? chart
                                     : ActionAngleChart(chart.system(), chart.energy(), Branch::Plus);
  double g0 = 0.0, g1 = 0.0;
  for (const auto& s : plus.samples()) {
    g0 = std::max(g0, std::abs(s.theta - s.x));
    g1 = std::max(g1, std::abs(s.dtheta_dx - 1.0));
  }
  return g0 + g1;
}

double position_at_energy(const MechanicalSystem1D& sys, double E, double theta) {
  if (sys.is_free()) return frac(theta);
  return ActionAngleChart(sys, E, Branch::Plus, 64).position_of_angle(theta);
}

void write_chart_csv(const ActionAngleChart& chart, std::ostream& os) {
  os << "x,theta,dtheta_dx\n" << std::setprecision(17);
  for (const auto& s : chart.samples()) os << s.x << ',' << s.theta << ',' << s.dtheta_dx << '\n';
}

}  // namespace rigidity
