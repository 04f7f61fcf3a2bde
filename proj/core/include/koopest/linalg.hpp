#pragma once

#include "koopest/types.hpp"

namespace koopest {

inline constexpr double kPinvRcond = 1e-12;

// Moore-Penrose pseudoinverse; singular values below rcond * sigma_max are
// treated as zero.
Matrix pinv(const Matrix& a, double rcond = kPinvRcond);

// Numerical rank under the same cutoff.
Eigen::Index numerical_rank(const Matrix& a, double rcond = kPinvRcond);

}  // namespace koopest
