#include "rigidity/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "rigidity/errors.hpp"

namespace rigidity::spectral {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<cplx> transform(std::span<const cplx> samples, const std::vector<int>& dims) {
  std::size_t total = 1;
  for (int n : dims) total *= static_cast<std::size_t>(n);
  if (samples.size() != total) throw DomainError("dft: sample count does not match shape");
  std::vector<cplx> in(samples.begin(), samples.end()), out(total);
  auto* pin = reinterpret_cast<fftw_complex*>(in.data());
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), pin, pout, FFTW_FORWARD,
                         FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / static_cast<double>(total);
  for (auto& c : out) c *= scale;
  return out;
}

}  // namespace

std::vector<cplx> dft(std::span<const cplx> samples) {
  if (samples.empty()) return {};
  return transform(samples, {static_cast<int>(samples.size())});
}

std::vector<cplx> dft_nd(std::span<const cplx> samples, std::size_t n, int d) {
  if (d < 1 || n == 0) throw DomainError("dft_nd: invalid shape");
  return transform(samples, std::vector<int>(static_cast<std::size_t>(d), static_cast<int>(n)));
}

cplx ModeSpectrum::at(long l) const {
  if (std::abs(l) > band()) return 0.0;
  return coeffs[fft_slot(l, samples)];
}

std::map<int, ModeSpectrum> chart_mode_spectra(const ActionAngleChart& chart,
                                               const std::vector<int>& ks, double tol,
                                               std::size_t L0, std::size_t L_max) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  auto compute = [&](std::size_t L) {
    const auto x = chart.positions_on_grid(L);
    std::map<int, ModeSpectrum> out;
    std::vector<cplx> f(L);
    for (int k : ks) {
      if (out.count(k)) continue;
      for (std::size_t j = 0; j < L; ++j) f[j] = std::polar(1.0, kTwoPi * k * x[j]);
      out[k] = ModeSpectrum{k, L, 0.0, dft(f)};
    }
    return out;
  };
  std::size_t L = L0;
  auto prev = compute(L);
  while (true) {
    auto cur = compute(2 * L);
    double change = 0.0;
    for (auto& [k, s] : cur) {
      const auto& p = prev.at(k);
      for (long l = -s.band(); l <= s.band(); ++l) change = std::max(change, std::abs(s.at(l) - p.at(l)));
    }
    L *= 2;
    for (auto& [k, s] : cur) s.change = change;
    prev = std::move(cur);
    if (change <= tol || L >= L_max) break;
  }
  return prev;
}

}  // namespace rigidity::spectral
