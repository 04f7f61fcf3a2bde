#pragma once

#include "koopest/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace koopest {

using StateVector = Vector;

// x1' = -0.7 x1,  x2' = -0.3 (x2 - x1^2). Finite-dimensional Koopman
// embedding on {x1, x2, x1^2}.
struct ToySystem {};

// x1' = x2,  x2' = alpha (1 - x1^2) x2 - x1.
struct VanDerPol {
  double alpha = 1.0;
};

// One monomial term `coefficient * prod_i x_i^exponents[i]` contributing to
// the derivative of state component `component`.
struct PolynomialTerm {
  std::size_t component = 0;
  double coefficient = 0.0;
  std::vector<int> exponents;
};

struct CustomPolynomial {
  std::size_t dimension = 1;
  std::vector<PolynomialTerm> terms;
};

using SystemKind = std::variant<ToySystem, VanDerPol, CustomPolynomial>;

class DynamicalSystem {
 public:
  explicit DynamicalSystem(SystemKind kind);

  static DynamicalSystem toy() { return DynamicalSystem(ToySystem{}); }
  static DynamicalSystem van_der_pol(double alpha) { return DynamicalSystem(VanDerPol{alpha}); }

  std::size_t dimension() const noexcept { return dimension_; }
  const SystemKind& kind() const noexcept { return kind_; }
  StateVector rhs(const StateVector& x) const;

 private:
  SystemKind kind_;
  std::size_t dimension_;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<StateVector> states;

  std::size_t dimension() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().size()); }
  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

struct SnapshotPair {
  StateVector x;
  StateVector y;
};

struct SnapshotDataset {
  std::vector<SnapshotPair> pairs;
  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

struct NoNoise {};
struct GaussianSigma {
  double sigma = 0.0;
};
struct SnrDb {
  double snr = 30.0;
};

struct NoiseSpec {
  std::variant<NoNoise, GaussianSigma, SnrDb> kind = NoNoise{};
  std::uint64_t seed = 0;
};

struct Disk {
  double radius = 1.0;
};

StateVector rk4_step(const DynamicalSystem& system, const StateVector& x, double dt);

Trajectory simulate(const DynamicalSystem& system, const StateVector& x0, double dt, std::size_t steps);

std::vector<StateVector> sample_initial_conditions(const Disk& region, std::size_t count, std::uint64_t seed);

// Per-entry additive zero-mean Gaussian noise. SnrDb converts to a standard
// deviation using the trajectory's mean squared entry as signal power.
Trajectory add_measurement_noise(const Trajectory& traj, const NoiseSpec& noise);

double noise_sigma(const Trajectory& traj, const NoiseSpec& noise);

SnapshotDataset build_snapshot_dataset(const std::vector<Trajectory>& trajectories);

}  // namespace koopest
