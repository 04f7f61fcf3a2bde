#pragma once

#include "koopest/estimator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace koopest {

// Componentwise z_i = cubic_i x_i^3 + linear_i x_i with cubic_i >= 0 and
// linear_i > 0, so every coordinate map is strictly increasing.
class Diffeomorphism {
 public:
  Diffeomorphism() = default;
  Diffeomorphism(Vector cubic, Vector linear, double domain_radius);

  static Diffeomorphism identity(std::size_t n, double domain_radius = 1.0);
  // h(x1, x2) = (x1^3 + x1, 2 x2)
  static Diffeomorphism cubic_example(double domain_radius);

  std::size_t dimension() const { return static_cast<std::size_t>(linear_.size()); }
  const Vector& cubic() const noexcept { return cubic_; }
  const Vector& linear() const noexcept { return linear_; }
  double domain_radius() const noexcept { return radius_; }
  bool is_identity() const;
  std::string tag() const;

  // Squared-sense Lipschitz constant, set by estimate_lipschitz.
  double lipschitz() const noexcept { return lipschitz_; }
  void set_lipschitz(double k) { lipschitz_ = k; }

  Vector apply(const Vector& x) const;
  // Safeguarded Newton per coordinate; throws InversionError after 100 iterations.
  Vector apply_inverse(const Vector& z) const;

 private:
  Vector cubic_;
  Vector linear_;
  double radius_ = 1.0;
  double lipschitz_ = 1.0;
};

inline Vector apply_h(const Diffeomorphism& d, const Vector& x) { return d.apply(x); }
inline Vector apply_h_inverse(const Diffeomorphism& d, const Vector& z) { return d.apply_inverse(z); }

// max ||h(x)-h(y)||^2 / ||x-y||^2 over random and nearby pairs in the disk
// of the diffeomorphism's domain radius, times `safety`. Also stored on `d`.
double estimate_lipschitz(Diffeomorphism& d, std::size_t pairs, std::uint64_t seed, double safety = 1.1);

struct MapFit {
  Matrix O;
  double residual = 0.0;           // ||target - O * source||_F
  double relative_residual = 0.0;  // residual / ||target||_F
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

// Minimum-norm least squares O = argmin sum ||target_j - O source_j||^2.
MapFit fit_linear_map(const Matrix& target, const Matrix& source);

MapFit fit_O1(const KoopmanModel& model, const std::vector<Vector>& measured_states, const Diffeomorphism& d);

struct StatePair {
  Vector estimated;
  Vector measured;
};

MapFit fit_O2(const Policy& policy, const std::vector<StatePair>& pairs, const Diffeomorphism& d);

// Pairs (x_hat, x_meas) along feedback rollouts of the trained estimator.
std::vector<StatePair> collect_state_pairs(const HybridEstimator& est, const std::vector<Trajectory>& measured);

// Psi~(z_{k+1}) = O1^+ A_r O1 Psi~(z_k) + O1^+ O2 a(z_hat_k, z_meas_k), read back through P U.
class TransferredEstimator {
 public:
  TransferredEstimator(KoopmanModel model, std::optional<Policy> policy, Matrix O1, Matrix O2);

  const KoopmanModel& model() const noexcept { return model_; }
  const std::optional<Policy>& policy() const noexcept { return policy_; }
  const Matrix& O1() const noexcept { return O1_; }
  const Matrix& O2() const noexcept { return O2_; }
  const Matrix& composed_operator() const noexcept { return composed_; }
  const Matrix& action_map() const noexcept { return action_map_; }
  void set_maps(Matrix O1, Matrix O2);

  Vector predict_with_action(const Vector& z_hat, const Vector& action) const;
  Vector predict(const Vector& z_hat, const Vector& z_meas) const;

 private:
  void refresh();

  KoopmanModel model_;
  std::optional<Policy> policy_;
  Matrix O1_;
  Matrix O2_;
  Matrix composed_;
  Matrix action_map_;
  Matrix pu_;
};

Vector transferred_predict(const TransferredEstimator& te, const Vector& z_hat, const Vector& z_meas);

// h(predict_next(h^-1(z_hat), h^-1(z_meas))).
Vector exact_transfer_predict(const HybridEstimator& est, const Diffeomorphism& d, const Vector& z_hat,
                              const Vector& z_meas);

// Psi~(x_next) - A_r Psi~(x_hat).
Vector residual_action(const KoopmanModel& model, const Vector& x_next, const Vector& x_hat);
// Minimum-norm action that makes P U (A_r Psi~(x_hat) + a) equal x_next.
Vector exact_residual_action(const KoopmanModel& model, const Vector& x_next, const Vector& x_hat);

struct ErrorSample {
  std::size_t trajectory = 0;
  std::size_t step = 0;
  double squared_error = 0.0;
};

struct BoundReport {
  double K = 0.0;
  double eps = 0.0;
  double bound = 0.0;
  double tolerance = 1e-8;
  double max_error = 0.0;
  double margin = 0.0;  // bound + tolerance - max_error
  bool holds = true;
  std::vector<ErrorSample> violations;
};

BoundReport check_error_bound(double K, double eps, const std::vector<ErrorSample>& errors,
                              double tolerance = 1e-8);

// sup ||a(x_meas, x_hat) - a*||^2 over (x_hat, x_meas, x_next) samples, with a* the
// minimum-norm exact residual action.
double residual_gap(const HybridEstimator& est, const std::vector<Trajectory>& measured,
                    const std::vector<Trajectory>& truth);

// One-step squared errors of the exact pullback estimator along z-domain
// feedback rollouts. With `oracle` the actor is replaced by the exact residual action.
std::vector<ErrorSample> exact_transfer_errors(const HybridEstimator& est, const Diffeomorphism& d,
                                               const std::vector<Trajectory>& z_measured,
                                               const std::vector<Trajectory>& z_truth, bool oracle = false);

// Fine-tuning environment that uses the fitted maps of the transferred estimator.
class TransferredEnv : public EstimatorEnv {
 public:
  explicit TransferredEnv(const TransferredEstimator& te) : te_(te) {}
  std::size_t state_dim() const override { return te_.model().state_dim(); }
  std::size_t action_dim() const override { return te_.model().rank(); }
  Vector step(const Vector& z_hat, const Vector&, const Vector& action) const override {
    return te_.predict_with_action(z_hat, action);
  }

 private:
  const TransferredEstimator& te_;
};

// Fine-tuning environment through the exact pullback: the policy observes
// h^-1 of the z-domain states and rewards are scored in z.
class PullbackEnv : public EstimatorEnv {
 public:
  PullbackEnv(const HybridEstimator& base, const Diffeomorphism& d) : base_(base), d_(d) {}
  std::size_t state_dim() const override { return base_.model().state_dim(); }
  std::size_t action_dim() const override { return base_.model().rank(); }
  Vector step(const Vector& z_hat, const Vector&, const Vector& action) const override;
  Vector observe(const Vector& z) const override { return d_.apply_inverse(z); }

 private:
  const HybridEstimator& base_;
  const Diffeomorphism& d_;
};

struct FinetuneResult {
  Agent agent;
  TrainResult history;
};

// Fresh agent whose actor (and actor target) start from `init`, then trained on
// the z-domain trajectories. Without `init` the actor keeps its random init.
FinetuneResult warm_start_finetune(const std::optional<Policy>& init, const EstimatorEnv& env,
                                   const std::vector<Trajectory>& z_trajectories, const TrainConfig& config,
                                   double action_scale, const StateEncoding& encoding);

}  // namespace koopest
