#pragma once

#include "koopest/types.hpp"

#include <vector>

namespace koopest {

using MultiIndex = std::vector<int>;

// Monomial lifting with the state-identity prefix: terms[0..n) are the unit
// indices e_1..e_n, so the first n lifted entries reproduce the state exactly.
//
// Terms of total degree >= 2 are evaluated as scale * prod (x_i / scale)^e_i.
// With the default scale of 1 this is the plain monomial. A scale near the
// domain radius keeps high-degree columns comparable in magnitude to the
// linear ones, which matters once the SVD truncates the lifted space.
class PolynomialDictionary {
 public:
  PolynomialDictionary() = default;
  PolynomialDictionary(std::size_t n, std::vector<MultiIndex> terms, double scale = 1.0);

  std::size_t state_dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<MultiIndex>& terms() const noexcept { return terms_; }
  double scale() const noexcept { return scale_; }
  int max_degree() const noexcept;
  bool has_constant() const noexcept;

  Vector lift(const Vector& x) const;
  Matrix lift_matrix(const std::vector<Vector>& states) const;

  bool operator==(const PolynomialDictionary& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<MultiIndex> terms_;
  double scale_ = 1.0;
};

PolynomialDictionary build_dictionary(std::size_t n, int max_degree, bool include_constant = false,
                                      double scale = 1.0);

// First n entries of a lifted vector.
Vector reconstruct(const Vector& lifted, std::size_t n);

}  // namespace koopest
