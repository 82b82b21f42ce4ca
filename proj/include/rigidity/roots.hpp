#pragma once

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>

namespace rigidity {

// Bracketed TOMS 748 root of an increasing function g with g(lo) < 0 < g(hi).
// Returns the nearer endpoint when the sign condition fails.
template <class G>
double solve_increasing(G&& g, double lo, double hi, double rel_tol = 4e-16) {
  const double glo = g(lo), ghi = g(hi);
  if (glo >= 0.0) return lo;
  if (ghi <= 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [rel_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b));
  };
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace rigidity
