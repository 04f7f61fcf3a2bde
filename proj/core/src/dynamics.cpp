#include "koopest/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace koopest {
namespace {

std::size_t dimension_of(const SystemKind& kind) {
  struct Visitor {
    std::size_t operator()(const ToySystem&) const { return 2; }
    std::size_t operator()(const VanDerPol&) const { return 2; }
    std::size_t operator()(const CustomPolynomial& p) const { return p.dimension; }
  };
  return std::visit(Visitor{}, kind);
}

}  // namespace

DynamicalSystem::DynamicalSystem(SystemKind kind) : kind_(std::move(kind)), dimension_(dimension_of(kind_)) {
  require(dimension_ >= 1, "system dimension must be >= 1");
  if (const auto* p = std::get_if<CustomPolynomial>(&kind_)) {
    for (const auto& term : p->terms) {
      require(term.component < dimension_, "polynomial term component out of range");
      require(term.exponents.size() == dimension_, "polynomial term exponent length must equal dimension");
      for (int e : term.exponents) require(e >= 0, "polynomial exponents must be >= 0");
    }
  }
}

StateVector DynamicalSystem::rhs(const StateVector& x) const {
  require_dims(x.size(), static_cast<Eigen::Index>(dimension_), "state dimension");
  struct Visitor {
    const StateVector& x;
    StateVector operator()(const ToySystem&) const {
      StateVector dx(2);
      dx(0) = -0.7 * x(0);
      dx(1) = -0.3 * (x(1) - x(0) * x(0));
      return dx;
    }
    StateVector operator()(const VanDerPol& v) const {
      StateVector dx(2);
      dx(0) = x(1);
      dx(1) = v.alpha * (1.0 - x(0) * x(0)) * x(1) - x(0);
      return dx;
    }
    StateVector operator()(const CustomPolynomial& p) const {
      StateVector dx = StateVector::Zero(static_cast<Eigen::Index>(p.dimension));
      for (const auto& term : p.terms) {
        double value = term.coefficient;
        for (std::size_t i = 0; i < p.dimension; ++i) {
          for (int k = 0; k < term.exponents[i]; ++k) value *= x(static_cast<Eigen::Index>(i));
        }
        dx(static_cast<Eigen::Index>(term.component)) += value;
      }
      return dx;
    }
  };
  return std::visit(Visitor{x}, kind_);
}

StateVector rk4_step(const DynamicalSystem& system, const StateVector& x, double dt) {
  require(dt > 0.0, "rk4_step: dt must be positive");
  require(x.allFinite(), "rk4_step: state must be finite");
  const StateVector k1 = system.rhs(x);
  const StateVector k2 = system.rhs(x + 0.5 * dt * k1);
  const StateVector k3 = system.rhs(x + 0.5 * dt * k2);
  const StateVector k4 = system.rhs(x + dt * k3);
  StateVector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw IntegrationDivergence("rk4_step produced a non-finite state", 0);
  return next;
}

Trajectory simulate(const DynamicalSystem& system, const StateVector& x0, double dt, std::size_t steps) {
  require(steps >= 1, "simulate: steps must be >= 1");
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(steps + 1);
  traj.states.push_back(x0);
  for (std::size_t k = 0; k < steps; ++k) {
    try {
      traj.states.push_back(rk4_step(system, traj.states.back(), dt));
    } catch (const IntegrationDivergence&) {
      throw IntegrationDivergence("integration diverged at step " + std::to_string(k + 1), k + 1);
    }
  }
  return traj;
}

std::vector<StateVector> sample_initial_conditions(const Disk& region, std::size_t count, std::uint64_t seed) {
  require(region.radius > 0.0, "disk radius must be positive");
  require(count >= 1, "sample count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StateVector> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // sqrt of a uniform radius fraction gives area-uniform samples
    const double r = region.radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    StateVector p(2);
    p << r * std::cos(theta), r * std::sin(theta);
    points.push_back(std::move(p));
  }
  return points;
}

double noise_sigma(const Trajectory& traj, const NoiseSpec& noise) {
  struct Visitor {
    const Trajectory& traj;
    double operator()(const NoNoise&) const { return 0.0; }
    double operator()(const GaussianSigma& g) const {
      require(g.sigma >= 0.0, "noise sigma must be >= 0");
      return g.sigma;
    }
    double operator()(const SnrDb& s) const {
      double power = 0.0;
      std::size_t count = 0;
      for (const auto& x : traj.states) {
        power += x.squaredNorm();
        count += static_cast<std::size_t>(x.size());
      }
      if (count == 0) return 0.0;
      power /= static_cast<double>(count);
      return std::sqrt(power * std::pow(10.0, -s.snr / 10.0));
    }
  };
  return std::visit(Visitor{traj}, noise.kind);
}

Trajectory add_measurement_noise(const Trajectory& traj, const NoiseSpec& noise) {
  require(!traj.states.empty(), "add_measurement_noise: trajectory is empty");
  const double sigma = noise_sigma(traj, noise);
  if (sigma == 0.0) return traj;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Trajectory noisy = traj;
  for (auto& x : noisy.states) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += gauss(rng);
  }
  return noisy;
}

SnapshotDataset build_snapshot_dataset(const std::vector<Trajectory>& trajectories) {
  SnapshotDataset data;
  if (trajectories.empty()) return data;
  const std::size_t n = trajectories.front().dimension();
  for (const auto& traj : trajectories) {
    require(traj.states.size() >= 2, "snapshot trajectory needs at least two states");
    if (traj.dimension() != n) throw DimensionMismatch("trajectories have differing state dimensions");
    for (std::size_t l = 0; l + 1 < traj.states.size(); ++l) {
      data.pairs.push_back({traj.states[l], traj.states[l + 1]});
    }
  }
  return data;
}

}  // namespace koopest
