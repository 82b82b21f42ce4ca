#include "rigidity/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "rigidity/errors.hpp"

namespace rigidity {

long gcd_of(std::span<const int> v) {
  long g = 0;
  for (int c : v) g = std::gcd(g, static_cast<long>(std::abs(c)));
  return g;
}

bool is_coprime(std::span<const int> v) { return gcd_of(v) == 1; }

bool all_nonzero(std::span<const int> v) {
  return !v.empty() && std::none_of(v.begin(), v.end(), [](int c) { return c == 0; });
}

int nonzero_count(std::span<const int> v) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), [](int c) { return c != 0; }));
}

long dot(std::span<const int> a, std::span<const int> b) {
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long>(a[i]) * b[i];
  return s;
}

double dot(std::span<const int> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Mode negated(std::span<const int> v) {
  Mode out(v.begin(), v.end());
  for (int& c : out) c = -c;
  return out;
}

bool is_zero(std::span<const int> v) {
  return std::all_of(v.begin(), v.end(), [](int c) { return c == 0; });
}

Mode primitive(std::span<const int> v) {
  Mode out(v.begin(), v.end());
  const long g = gcd_of(v);
  if (g > 1)
    for (int& c : out) c = static_cast<int>(c / g);
  return out;
}

bool is_representative(std::span<const int> k) {
  for (int c : k) {
    if (c > 0) return true;
    if (c < 0) return false;
  }
  return true;  // zero vector
}

std::string to_string(std::span<const int> v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

ResonanceVector::ResonanceVector(Mode b) : b_(std::move(b)) {
  if (b_.empty()) throw DomainError("resonance vector must be nonempty");
  if (!all_nonzero(b_))
    throw DomainError("resonance vector " + to_string(b_) + " has a zero component");
  if (!is_coprime(b_))
    throw DomainError("resonance vector " + to_string(b_) + " is not coprime");
}

int ResonanceVector::max_abs() const {
  int m = 0;
  for (int c : b_) m = std::max(m, std::abs(c));
  return m;
}

ResonanceVector ResonanceVector::operator-() const { return ResonanceVector(negated(b_)); }

}  // namespace rigidity
