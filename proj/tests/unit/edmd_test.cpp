#include <koopest/edmd.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace koopest;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

PolynomialDictionary example_one() { return PolynomialDictionary(2, {{1, 0}, {0, 1}, {2, 0}}); }

std::vector<Trajectory> toy_data(std::size_t m, double radius, std::uint64_t seed) {
  std::vector<Trajectory> out;
  for (const auto& x0 : sample_initial_conditions(Disk{radius}, m, seed)) {
    out.push_back(simulate(DynamicalSystem::toy(), x0, 0.1, 200));
  }
  return out;
}

}  // namespace

TEST(FitFull, RecoversDiagonalLinearMap) {
  Matrix B(2, 2);
  B << 0.9, 0.0, 0.0, 0.8;
  std::mt19937_64 rng(1);
  const Matrix X = random_matrix(2, 30, rng);
  EXPECT_TRUE(fit_full(X, B * X).isApprox(B, 1e-10));
}

TEST(FitFull, SquareInvertibleIdentity) {
  std::mt19937_64 rng(2);
  const Matrix X = random_matrix(4, 4, rng);
  EXPECT_TRUE(fit_full(X, X).isApprox(Matrix::Identity(4, 4), 1e-10));
}

TEST(FitFull, ExampleOneMatchesMatrixExponential) {
  const auto data = build_snapshot_dataset(toy_data(20, 1.0, 4));
  const auto d = example_one();
  std::vector<Vector> xs, ys;
  for (const auto& p : data.pairs) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const Matrix A = fit_full(d.lift_matrix(xs), d.lift_matrix(ys));
  const Matrix ref = oracle::expm(oracle::toy_generator() * 0.1);
  EXPECT_LT((A - ref).cwiseAbs().maxCoeff(), 1e-4) << A;
  EXPECT_NEAR(ref(0, 0), 0.932394, 1e-6);
  EXPECT_NEAR(ref(1, 1), 0.970446, 1e-6);
  EXPECT_NEAR(ref(1, 2), 0.027569, 1e-6);
  EXPECT_NEAR(ref(2, 2), 0.869358, 1e-6);
}

TEST(FitFull, LeastSquaresOptimality) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index N = 2 + trial % 5;
    const Matrix X = random_matrix(N, 20, rng);
    const Matrix Y = random_matrix(N, 20, rng);
    const Matrix A = fit_full(X, Y);
    const double best = (A * X - Y).norm();
    for (int k = 0; k < 100; ++k) {
      Matrix delta = random_matrix(N, N, rng);
      delta *= 1e-3 / delta.norm();
      ASSERT_LE(best, ((A + delta) * X - Y).norm());
    }
  }
}

TEST(FitFull, ExactLinearRecovery) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix B = random_matrix(3, 3, rng);
    const Matrix X = random_matrix(3, 15, rng);
    EXPECT_LT((fit_full(X, B * X) - B).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FitReduced, FullRankMatchesFullSpectrum) {
  std::mt19937_64 rng(5);
  const Matrix X = random_matrix(5, 40, rng);
  const Matrix Y = random_matrix(5, 5, rng) * 0.3 * X + 0.01 * random_matrix(5, 40, rng);
  const auto d = build_dictionary(5, 1);
  const KoopmanModel m = fit_reduced(d, X, Y, FixedRank{5});
  const auto reduced = koopman_eigenvalues(m);
  const auto full = sorted_eigenvalues(fit_full(X, Y));
  ASSERT_EQ(reduced.size(), full.size());
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_LT(std::abs(reduced[i] - full[i]), 1e-8);
}

TEST(FitReduced, RankOneData) {
  Matrix X(3, 10);
  for (Eigen::Index j = 0; j < 10; ++j) X.col(j) = Vector::Ones(3) * static_cast<double>(j + 1);
  const KoopmanModel m = fit_reduced(build_dictionary(3, 1), X, 0.5 * X, EnergyThreshold{0.99});
  EXPECT_EQ(m.rank(), 1u);
  EXPECT_THROW(fit_reduced(build_dictionary(3, 1), X, X, FixedRank{2}), RankDeficiency);
}

TEST(FitReduced, ToyDegreeTenRankBounded) {
  const auto d = build_dictionary(2, 10, false, 20.0);
  const KoopmanModel m = fit_reduced(d, build_snapshot_dataset(toy_data(20, 10.0, 6)), EnergyThreshold{0.9999});
  EXPECT_GE(m.rank(), 1u);
  EXPECT_LE(m.rank(), 65u);
  EXPECT_LT((m.U.transpose() * m.U - Matrix::Identity(m.U.cols(), m.U.cols())).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 0; i + 1 < m.sigma.size(); ++i) EXPECT_GT(m.sigma(i), m.sigma(i + 1));
  EXPECT_GT(m.sigma(m.sigma.size() - 1), 0.0);
}

TEST(FitReduced, RejectsBadInput) {
  const auto d = build_dictionary(2, 1);
  EXPECT_THROW(fit_reduced(d, Matrix(2, 0), Matrix(2, 0)), InvalidArgument);
  EXPECT_THROW(fit_reduced(d, Matrix::Ones(2, 3), Matrix::Ones(2, 4)), DimensionMismatch);
  EXPECT_THROW(fit_reduced(d, SnapshotDataset{}), InvalidArgument);
}

TEST(FitReduced, SpectralConsistencyAtNumericalRank) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix X = random_matrix(4, 30, rng);
    const Matrix Y = random_matrix(4, 4, rng) * X;
    const KoopmanModel m = fit_reduced(build_dictionary(4, 1), X, Y, FixedRank{4});
    const auto a = koopman_eigenvalues(m);
    const auto b = sorted_eigenvalues(fit_full(X, Y));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-6);
  }
}

namespace {

KoopmanModel identity_model() {
  KoopmanModel m;
  m.dict = build_dictionary(2, 2);
  m.U = Matrix::Identity(5, 5);
  m.sigma = Vector::Ones(5);
  m.A_r = Matrix::Identity(5, 5);
  return m;
}

KoopmanModel example_one_model() {
  const auto d = example_one();
  return fit_reduced(d, build_snapshot_dataset(toy_data(20, 1.0, 8)), FixedRank{3});
}

}  // namespace

TEST(Project, IdentityBasis) {
  const KoopmanModel m = identity_model();
  EXPECT_EQ(project(m, v2(2, 3)), m.dict.lift(v2(2, 3)));
  EXPECT_TRUE(project(m, v2(0, 0)).isZero(0.0));
}

TEST(Project, SemiUnitaryContraction) {
  const auto d = build_dictionary(2, 6, false, 20.0);
  const KoopmanModel m = fit_reduced(d, build_snapshot_dataset(toy_data(10, 10.0, 9)), EnergyThreshold{0.99});
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 200; ++i) {
    const Vector x = v2(u(rng), u(rng));
    EXPECT_LE(project(m, x).norm(), d.lift(x).norm() * (1 + 1e-12));
  }
}

TEST(PredictLifted, TrivialCases) {
  const KoopmanModel m = identity_model();
  EXPECT_TRUE(predict_lifted(m, Vector::Zero(5)).isZero(0.0));
  const Vector psi = Vector::LinSpaced(5, -1, 1);
  EXPECT_EQ(predict_lifted(m, psi), psi);
  EXPECT_THROW(predict_lifted(m, Vector::Zero(4)), DimensionMismatch);
}

TEST(PredictLifted, ExampleOneFlow) {
  const KoopmanModel m = example_one_model();
  const Vector x1 = reconstruct_state(m, predict_lifted(m, project(m, v2(1, 1))));
  const Eigen::Vector2d ref = oracle::toy_flow({1, 1}, 0.1);
  EXPECT_NEAR(x1(0), ref(0), 1e-3);
  EXPECT_NEAR(x1(1), ref(1), 1e-3);
}

TEST(ReconstructState, Cases) {
  const KoopmanModel id = identity_model();
  EXPECT_EQ(reconstruct_state(id, id.dict.lift(v2(2, 3))), v2(2, 3));
  EXPECT_TRUE(reconstruct_state(id, Vector::Zero(5)).isZero(0.0));
  const KoopmanModel m = example_one_model();
  EXPECT_LT((reconstruct_state(m, project(m, v2(0.4, -0.7))) - v2(0.4, -0.7)).norm(), 1e-10);
}

TEST(Eigenvalues, ExampleOneModuli) {
  const auto ev = koopman_eigenvalues(example_one_model());
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(std::abs(ev[0]), std::exp(-0.03), 1e-3);
  EXPECT_NEAR(std::abs(ev[1]), std::exp(-0.07), 1e-3);
  EXPECT_NEAR(std::abs(ev[2]), std::exp(-0.14), 1e-3);
}

TEST(Eigenvalues, IdentityAndZero) {
  KoopmanModel m = identity_model();
  for (const auto& e : koopman_eigenvalues(m)) EXPECT_NEAR(std::abs(e - 1.0), 0.0, 1e-14);
  m.A_r.setZero();
  for (const auto& e : koopman_eigenvalues(m)) EXPECT_EQ(std::abs(e), 0.0);
}

TEST(SelectRank, EnergyThreshold) {
  Vector s(4);
  s << 10, 1, 0.1, 0.0;
  EXPECT_EQ(select_rank(s, EnergyThreshold{0.9}), 1u);
  EXPECT_EQ(select_rank(s, EnergyThreshold{0.99999}), 3u);
  EXPECT_EQ(select_rank(s, EnergyThreshold{1.0}), 3u);
  EXPECT_THROW(select_rank(s, FixedRank{4}), RankDeficiency);
  EXPECT_THROW(select_rank(s, EnergyThreshold{0.0}), InvalidArgument);
}
