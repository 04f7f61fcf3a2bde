#pragma once

#include <koopest/ddpg.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

// One-parameter linear critic Q_theta(s, a) = theta * w0 . input(s, a). The
// max-of-two-losses objective is then a pointwise max of two quadratics in
// theta per sample, so its exact minimizer follows from enumerating the
// branch switch points and minimizing one quadratic per interval.
struct ScalarCriticProblem {
  std::vector<double> r;
  std::vector<double> phi;       // w0 . input(s, a)
  std::vector<double> phi_next;  // w0 . input(s', mu'(s'))
  double gamma = 0.9;

  double loss(double theta, double theta_target) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double q = theta * phi[j];
      const double d1 = r[j] + gamma * theta_target * phi_next[j] - q;
      const double d2 = r[j] + gamma * theta * phi_next[j] - q;
      acc += std::max(d1 * d1, d2 * d2);
    }
    return acc / static_cast<double>(r.size());
  }

  // returns (argmin, min)
  std::pair<double, double> minimize(double theta_target) const {
    std::vector<double> cuts;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double y1 = r[j] + gamma * theta_target * phi_next[j];
      const double c = gamma * phi_next[j] - phi[j];
      // y1 - t phi = +(r + t c)  or  -(r + t c)
      if (phi[j] + c != 0.0) cuts.push_back((y1 - r[j]) / (phi[j] + c));
      if (phi[j] - c != 0.0) cuts.push_back((y1 + r[j]) / (phi[j] - c));
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> lo{-std::numeric_limits<double>::infinity()};
    std::vector<double> hi;
    for (double t : cuts) {
      hi.push_back(t);
      lo.push_back(t);
    }
    hi.push_back(std::numeric_limits<double>::infinity());

    double best_t = 0.0;
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double t) {
      const double v = loss(t, theta_target);
      if (v < best) {
        best = v;
        best_t = t;
      }
    };
    for (double t : cuts) consider(t);
    for (std::size_t k = 0; k < lo.size(); ++k) {
      double probe;
      if (std::isinf(lo[k]) && std::isinf(hi[k])) probe = 0.0;
      else if (std::isinf(lo[k])) probe = hi[k] - 1.0;
      else if (std::isinf(hi[k])) probe = lo[k] + 1.0;
      else probe = 0.5 * (lo[k] + hi[k]);
      // quadratic a t^2 + b t on this interval with the branch active at the probe
      double a = 0.0;
      double b = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) {
        const double y1 = r[j] + gamma * theta_target * phi_next[j];
        const double c = gamma * phi_next[j] - phi[j];
        const double d1 = y1 - probe * phi[j];
        const double d2 = r[j] + probe * c;
        if (d2 * d2 > d1 * d1) {
          a += c * c;
          b += 2.0 * r[j] * c;
        } else {
          a += phi[j] * phi[j];
          b += -2.0 * y1 * phi[j];
        }
      }
      if (a <= 0.0) continue;
      const double t = std::clamp(-b / (2.0 * a), lo[k], hi[k]);
      if (std::isfinite(t)) consider(t);
    }
    return {best_t, best};
  }
};

}  // namespace oracle
