#include "koopest/edmd.hpp"

#include "koopest/linalg.hpp"

#include <algorithm>

namespace koopest {
namespace {

void check_pair(const Matrix& psi_x, const Matrix& psi_y) {
  require(psi_x.cols() > 0, "EDMD needs at least one snapshot pair");
  require_dims(psi_y.cols(), psi_x.cols(), "EDMD column count");
  require_dims(psi_y.rows(), psi_x.rows(), "EDMD row count");
}

}  // namespace

Matrix fit_full(const Matrix& psi_x, const Matrix& psi_y) {
  check_pair(psi_x, psi_y);
  return psi_y * pinv(psi_x);
}

std::size_t select_rank(const Vector& s, const RankPolicy& policy) {
  const double cutoff = s.size() > 0 ? kPinvRcond * s(0) : 0.0;
  std::size_t numerical = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) ++numerical;
  }
  if (numerical == 0) throw RankDeficiency("lifted data matrix is zero");

  if (const auto* fixed = std::get_if<FixedRank>(&policy)) {
    require(fixed->r >= 1, "fixed rank must be >= 1");
    if (fixed->r > numerical) {
      throw RankDeficiency("requested rank " + std::to_string(fixed->r) + " exceeds numerical rank " +
                           std::to_string(numerical));
    }
    return fixed->r;
  }
  const double tau = std::get<EnergyThreshold>(policy).tau;
  require(tau > 0.0 && tau <= 1.0, "energy threshold must lie in (0, 1]");
  const double total = s.head(static_cast<Eigen::Index>(numerical)).squaredNorm();
  double acc = 0.0;
  for (std::size_t r = 0; r < numerical; ++r) {
    acc += s(static_cast<Eigen::Index>(r)) * s(static_cast<Eigen::Index>(r));
    if (acc >= tau * total) return r + 1;
  }
  return numerical;
}

KoopmanModel fit_reduced(const PolynomialDictionary& dict, const Matrix& psi_x, const Matrix& psi_y,
                         const RankPolicy& policy) {
  check_pair(psi_x, psi_y);
  require_dims(psi_x.rows(), static_cast<Eigen::Index>(dict.size()), "lifted dimension");
  if (!psi_x.allFinite() || !psi_y.allFinite()) throw InvalidArgument("lifted data contains non-finite values");

  Eigen::BDCSVD<Matrix> svd(psi_x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = static_cast<Eigen::Index>(select_rank(svd.singularValues(), policy));

  KoopmanModel model;
  model.dict = dict;
  model.U = svd.matrixU().leftCols(r);
  model.sigma = svd.singularValues().head(r);
  model.V = svd.matrixV().leftCols(r);
  model.A_r = model.U.transpose() * psi_y * model.V * model.sigma.cwiseInverse().asDiagonal();
  return model;
}

KoopmanModel fit_reduced(const PolynomialDictionary& dict, const SnapshotDataset& data, const RankPolicy& policy) {
  require(!data.empty(), "snapshot dataset is empty");
  std::vector<Vector> xs;
  std::vector<Vector> ys;
  xs.reserve(data.size());
  ys.reserve(data.size());
  for (const auto& p : data.pairs) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  return fit_reduced(dict, dict.lift_matrix(xs), dict.lift_matrix(ys), policy);
}

Vector project(const KoopmanModel& model, const Vector& x) { return model.U.transpose() * model.dict.lift(x); }

Vector predict_lifted(const KoopmanModel& model, const Vector& psi) {
  require_dims(psi.size(), static_cast<Eigen::Index>(model.rank()), "reduced vector length");
  return model.A_r * psi;
}

Vector reconstruct_state(const KoopmanModel& model, const Vector& psi) {
  require_dims(psi.size(), static_cast<Eigen::Index>(model.rank()), "reduced vector length");
  return model.PU() * psi;
}

std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& a) {
  require(a.rows() == a.cols(), "eigenvalues need a square matrix");
  Eigen::EigenSolver<Matrix> solver(a, false);
  std::vector<std::complex<double>> ev(solver.eigenvalues().data(),
                                       solver.eigenvalues().data() + solver.eigenvalues().size());
  std::stable_sort(ev.begin(), ev.end(),
                   [](const auto& l, const auto& r) { return std::abs(l) > std::abs(r); });
  return ev;
}

std::vector<std::complex<double>> koopman_eigenvalues(const KoopmanModel& model) {
  return sorted_eigenvalues(model.A_r);
}

}  // namespace koopest
