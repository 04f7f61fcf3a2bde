#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace oracle {

// Closed-form flow of x1' = -0.7 x1, x2' = -0.3 (x2 - x1^2).
inline Eigen::Vector2d toy_flow(const Eigen::Vector2d& x0, double t) {
  const double a = x0(0);
  const double b = x0(1);
  const double c = 0.3 * a * a / (0.3 - 1.4);  // particular-solution coefficient of e^{-1.4 t}
  Eigen::Vector2d x;
  x(0) = a * std::exp(-0.7 * t);
  x(1) = (b - c) * std::exp(-0.3 * t) + c * std::exp(-1.4 * t);
  return x;
}

// exp(M) by scaled Taylor series with repeated squaring.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Eigen::MatrixXd a = m / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

// Generator of the toy system on {x1, x2, x1^2}.
inline Eigen::Matrix3d toy_generator() {
  Eigen::Matrix3d k;
  k << -0.7, 0.0, 0.0, 0.0, -0.3, 0.3, 0.0, 0.0, -1.4;
  return k;
}

}  // namespace oracle
