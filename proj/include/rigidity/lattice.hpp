#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rigidity {

// Integer frequency vector k in Z^d. Ordered lexicographically so it can key
// std::map / std::set.
using Mode = std::vector<int>;

long gcd_of(std::span<const int> v);
bool is_coprime(std::span<const int> v);
bool all_nonzero(std::span<const int> v);
int nonzero_count(std::span<const int> v);
long dot(std::span<const int> a, std::span<const int> b);
double dot(std::span<const int> a, std::span<const double> b);
Mode negated(std::span<const int> v);
bool is_zero(std::span<const int> v);

// Divides by the gcd of the absolute components; the zero vector is returned
// unchanged.
Mode primitive(std::span<const int> v);

// Of {k, -k}, the lexicographically larger one. Used to store a single
// representative per Hermitian pair.
bool is_representative(std::span<const int> k);

std::string to_string(std::span<const int> v);

// Coprime integer vector with every component nonzero. Indexes the resonant
// tori (n, m, ...) used by the averaging and Gram machinery.
class ResonanceVector {
 public:
  explicit ResonanceVector(Mode b);

  const Mode& components() const { return b_; }
  int operator[](std::size_t i) const { return b_[i]; }
  std::size_t size() const { return b_.size(); }
  int max_abs() const;

  ResonanceVector operator-() const;

  auto operator<=>(const ResonanceVector&) const = default;
  bool operator==(const ResonanceVector&) const = default;

 private:
  Mode b_;
};

}  // namespace rigidity
