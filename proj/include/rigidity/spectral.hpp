#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "rigidity/action_angle.hpp"
#include "rigidity/potentials.hpp"

namespace rigidity::spectral {

// Normalized forward DFT: c_l = (1/n) sum_j f_j e^{-2 pi i j l / n}, in FFT order.
std::vector<cplx> dft(std::span<const cplx> samples);

// Same on an n^d row-major array (first axis slowest).
std::vector<cplx> dft_nd(std::span<const cplx> samples, std::size_t n, int d);

// Position of frequency l in an FFT-ordered array of length n (|l| < n/2).
inline std::size_t fft_slot(long l, std::size_t n) {
  return static_cast<std::size_t>(l >= 0 ? l : static_cast<long>(n) + l);
}

// Fourier coefficients of theta -> e^{2 pi i k x(theta)} along a + chart.
struct ModeSpectrum {
  int k = 0;
  std::size_t samples = 0;
  double change = 0.0;  // max coefficient change at the final doubling
  std::vector<cplx> coeffs;  // FFT order

  cplx at(long l) const;
  long band() const { return static_cast<long>(samples / 2) - 1; }
};

// Sample count doubles from L0 until all coefficients with |l| < L/2 change
// by at most tol.
std::map<int, ModeSpectrum> chart_mode_spectra(const ActionAngleChart& chart,
                                               const std::vector<int>& ks, double tol = 1e-14,
                                               std::size_t L0 = 256,
                                               std::size_t L_max = std::size_t{1} << 16);

}  // namespace rigidity::spectral
