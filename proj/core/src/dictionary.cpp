#include "koopest/dictionary.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace koopest {
namespace {

int degree(const MultiIndex& m) { return std::accumulate(m.begin(), m.end(), 0); }

bool is_unit(const MultiIndex& m, std::size_t i) {
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] != (j == i ? 1 : 0)) return false;
  }
  return true;
}

}  // namespace

PolynomialDictionary::PolynomialDictionary(std::size_t n, std::vector<MultiIndex> terms, double scale)
    : n_(n), terms_(std::move(terms)), scale_(scale) {
  require(n_ >= 1, "dictionary state dimension must be >= 1");
  require(scale_ > 0.0, "dictionary scale must be positive");
  require(terms_.size() >= n_, "dictionary needs at least the n identity terms");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    require(terms_[i].size() == n_, "multi-index length must equal the state dimension");
    for (int e : terms_[i]) require(e >= 0, "exponents must be >= 0");
    if (i < n_) require(is_unit(terms_[i], i), "dictionary must start with the identity terms in order");
  }
  std::set<MultiIndex> unique(terms_.begin(), terms_.end());
  require(unique.size() == terms_.size(), "dictionary terms must be unique");
}

int PolynomialDictionary::max_degree() const noexcept {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, degree(t));
  return d;
}

bool PolynomialDictionary::has_constant() const noexcept {
  return std::any_of(terms_.begin(), terms_.end(), [](const MultiIndex& m) { return degree(m) == 0; });
}

Vector PolynomialDictionary::lift(const Vector& x) const {
  require_dims(x.size(), static_cast<Eigen::Index>(n_), "lift: state dimension");
  Vector out(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t i = 0; i < n_; ++i) out(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(i));
  for (std::size_t j = n_; j < terms_.size(); ++j) {
    const auto& m = terms_[j];
    const int d = degree(m);
    double v = 1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double xi = d >= 2 ? x(static_cast<Eigen::Index>(i)) / scale_ : x(static_cast<Eigen::Index>(i));
      for (int k = 0; k < m[i]; ++k) v *= xi;
    }
    if (d >= 2) v *= scale_;
    out(static_cast<Eigen::Index>(j)) = v;
  }
  return out;
}

Matrix PolynomialDictionary::lift_matrix(const std::vector<Vector>& states) const {
  Matrix out(static_cast<Eigen::Index>(terms_.size()), static_cast<Eigen::Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = lift(states[j]);
  return out;
}

PolynomialDictionary build_dictionary(std::size_t n, int max_degree, bool include_constant, double scale) {
  require(n >= 1, "build_dictionary: n must be >= 1");
  require(max_degree >= 1, "build_dictionary: max_degree must be >= 1");
  std::vector<MultiIndex> terms;
  for (std::size_t i = 0; i < n; ++i) {
    MultiIndex m(n, 0);
    m[i] = 1;
    terms.push_back(m);
  }
  // graded lex: for each degree, exponent vectors in descending lexicographic order
  for (int d = 2; d <= max_degree; ++d) {
    MultiIndex m(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int remaining) {
      if (pos + 1 == n) {
        m[pos] = remaining;
        terms.push_back(m);
        return;
      }
      for (int e = remaining; e >= 0; --e) {
        m[pos] = e;
        rec(pos + 1, remaining - e);
      }
    };
    rec(0, d);
  }
  if (include_constant) terms.emplace_back(n, 0);
  return PolynomialDictionary(n, std::move(terms), scale);
}

Vector reconstruct(const Vector& lifted, std::size_t n) {
  require(static_cast<std::size_t>(lifted.size()) >= n, "reconstruct: lifted vector shorter than n");
  return lifted.head(static_cast<Eigen::Index>(n));
}

}  // namespace koopest
