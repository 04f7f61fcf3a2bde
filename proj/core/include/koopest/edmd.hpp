#pragma once

#include "koopest/dictionary.hpp"
#include "koopest/dynamics.hpp"

#include <complex>
#include <variant>
#include <vector>

namespace koopest {

struct FixedRank {
  std::size_t r = 1;
};
struct EnergyThreshold {
  double tau = 0.9999;
};
using RankPolicy = std::variant<FixedRank, EnergyThreshold>;

// Reduced-order Koopman model. Psi~(x) := U^T Psi(x); the state estimate is
// recovered as the first n entries of U psi.
struct KoopmanModel {
  PolynomialDictionary dict;
  Matrix U;       // N x r
  Vector sigma;   // r
  Matrix V;       // pairs x r (empty after deserialization)
  Matrix A_r;     // r x r

  std::size_t rank() const noexcept { return static_cast<std::size_t>(A_r.rows()); }
  std::size_t state_dim() const noexcept { return dict.state_dim(); }
  // P U, the n x r block used to map reduced vectors back to states.
  Matrix PU() const { return U.topRows(static_cast<Eigen::Index>(dict.state_dim())); }
};

Matrix fit_full(const Matrix& psi_x, const Matrix& psi_y);

KoopmanModel fit_reduced(const PolynomialDictionary& dict, const Matrix& psi_x, const Matrix& psi_y,
                         const RankPolicy& policy = EnergyThreshold{});

// Lifts the dataset with `dict` and fits the reduced model.
KoopmanModel fit_reduced(const PolynomialDictionary& dict, const SnapshotDataset& data,
                         const RankPolicy& policy = EnergyThreshold{});

// Rank chosen by `policy` for the given singular values.
std::size_t select_rank(const Vector& singular_values, const RankPolicy& policy);

Vector project(const KoopmanModel& model, const Vector& x);
Vector predict_lifted(const KoopmanModel& model, const Vector& psi);
Vector reconstruct_state(const KoopmanModel& model, const Vector& psi);

// Eigenvalues of A_r sorted by descending modulus.
std::vector<std::complex<double>> koopman_eigenvalues(const KoopmanModel& model);
std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& a);

}  // namespace koopest
