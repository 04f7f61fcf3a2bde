#pragma once

#include "koopest/ddpg.hpp"
#include "koopest/edmd.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace koopest {

// x_hat_{k+1} = P U (A_r Psi~(x_hat_k) + a(x_meas_k, x_hat_k)).
class HybridEstimator {
 public:
  explicit HybridEstimator(KoopmanModel model, std::optional<Policy> policy = std::nullopt);

  const KoopmanModel& model() const noexcept { return model_; }
  const std::optional<Policy>& policy() const noexcept { return policy_; }
  const Matrix& PU() const noexcept { return pu_; }

  // The reduced-space prediction A_r Psi~(x_hat) before any correction.
  Vector koopman_term(const Vector& x_hat) const;
  Vector action(const Vector& x_hat, const Vector& x_meas) const;
  Vector predict_next(const Vector& x_hat, const Vector& x_meas) const;
  // Prediction with an externally supplied reduced-space action.
  Vector predict_with_action(const Vector& x_hat, const Vector& action) const;

 private:
  KoopmanModel model_;
  std::optional<Policy> policy_;
  Matrix pu_;
};

using Predictor = std::function<Vector(const Vector& x_hat, const Vector& x_meas)>;

// x_hat_0 = measured[0]; x_hat_{k+1} = predict(x_hat_k, measured[k]).
Trajectory rollout(const Predictor& predict, const Trajectory& measured);
Trajectory rollout(const HybridEstimator& est, const Trajectory& measured);
// Diagnostic mode: ignores measurements after the first.
Trajectory open_loop_rollout(const HybridEstimator& est, const Vector& x0, std::size_t steps, double dt);

struct EvalReport {
  std::vector<double> per_trajectory;
  double aggregate = 0.0;
  double seconds = 0.0;
  std::string convention = "mean over steps k>=1 of ||x_hat_k - x_k||^2 / n";
};

// Non-finite errors are reported as +inf.
double trajectory_mse(const Trajectory& estimates, const Trajectory& truth);
EvalReport evaluate_mse(const Trajectory& estimates, const Trajectory& truth);
EvalReport evaluate_mse(const std::vector<Trajectory>& estimates, const std::vector<Trajectory>& truth);

// Rollout each measured trajectory and score against the matching truth.
EvalReport evaluate_predictor(const Predictor& predict, const std::vector<Trajectory>& measured,
                              const std::vector<Trajectory>& truth, std::vector<Trajectory>* estimates = nullptr);

// Training environment for the hybrid estimator: actions live in the reduced space.
class HybridEnv : public EstimatorEnv {
 public:
  explicit HybridEnv(const HybridEstimator& base) : base_(base) {}
  std::size_t state_dim() const override { return base_.model().state_dim(); }
  std::size_t action_dim() const override { return base_.model().rank(); }
  Vector step(const Vector& x_hat, const Vector& x_meas, const Vector& action) const override;

 private:
  const HybridEstimator& base_;
};

// Baseline without a Koopman term: the action is the next estimate itself.
class RlOnlyEnv : public EstimatorEnv {
 public:
  explicit RlOnlyEnv(std::size_t n) : n_(n) {}
  std::size_t state_dim() const override { return n_; }
  std::size_t action_dim() const override { return n_; }
  Vector step(const Vector&, const Vector&, const Vector& action) const override { return action; }

 private:
  std::size_t n_;
};

Predictor hybrid_predictor(const HybridEstimator& est);
Predictor rl_only_predictor(const Policy& policy);

struct RlOnlyResult {
  Policy policy;
  TrainResult history;
};

// Trains the state-regression baseline with the same loop and budget as the hybrid.
RlOnlyResult rl_only_baseline(const std::vector<Trajectory>& trajectories, double action_scale,
                              const StateEncoding& encoding, const TrainConfig& config);

}  // namespace koopest
