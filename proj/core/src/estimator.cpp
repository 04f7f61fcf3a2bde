#include "koopest/estimator.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace koopest {

HybridEstimator::HybridEstimator(KoopmanModel model, std::optional<Policy> policy)
    : model_(std::move(model)), policy_(std::move(policy)), pu_(model_.PU()) {
  if (policy_) {
    require_dims(policy_->actor.input_dim(), static_cast<Eigen::Index>(2 * model_.state_dim()), "actor input");
    require_dims(policy_->actor.output_dim(), static_cast<Eigen::Index>(model_.rank()), "actor output");
  }
}

Vector HybridEstimator::koopman_term(const Vector& x_hat) const { return model_.A_r * project(model_, x_hat); }

Vector HybridEstimator::action(const Vector& x_hat, const Vector& x_meas) const {
  if (!policy_) return Vector::Zero(static_cast<Eigen::Index>(model_.rank()));
  return policy_->act(x_meas, x_hat);
}

Vector HybridEstimator::predict_next(const Vector& x_hat, const Vector& x_meas) const {
  if (!policy_) return pu_ * koopman_term(x_hat);
  return pu_ * (koopman_term(x_hat) + policy_->act(x_meas, x_hat));
}

Vector HybridEstimator::predict_with_action(const Vector& x_hat, const Vector& action) const {
  require_dims(action.size(), static_cast<Eigen::Index>(model_.rank()), "reduced action");
  return pu_ * (koopman_term(x_hat) + action);
}

Trajectory rollout(const Predictor& predict, const Trajectory& measured) {
  require(!measured.states.empty(), "rollout: measured trajectory is empty");
  Trajectory est;
  est.dt = measured.dt;
  est.states.reserve(measured.states.size());
  est.states.push_back(measured.states.front());
  for (std::size_t k = 0; k + 1 < measured.states.size(); ++k) {
    est.states.push_back(predict(est.states.back(), measured.states[k]));
  }
  return est;
}

Trajectory rollout(const HybridEstimator& est, const Trajectory& measured) {
  return rollout(hybrid_predictor(est), measured);
}

Trajectory open_loop_rollout(const HybridEstimator& est, const Vector& x0, std::size_t steps, double dt) {
  Trajectory out;
  out.dt = dt;
  out.states.push_back(x0);
  for (std::size_t k = 0; k < steps; ++k) out.states.push_back(est.predict_next(out.states.back(), x0));
  return out;
}

double trajectory_mse(const Trajectory& estimates, const Trajectory& truth) {
  if (estimates.states.size() != truth.states.size()) {
    throw DimensionMismatch("evaluate_mse: trajectories differ in length");
  }
  if (truth.states.size() < 2) return 0.0;
  const double n = static_cast<double>(truth.dimension());
  double acc = 0.0;
  for (std::size_t k = 1; k < truth.states.size(); ++k) {
    require_dims(estimates.states[k].size(), truth.states[k].size(), "evaluate_mse: state dimension");
    acc += (estimates.states[k] - truth.states[k]).squaredNorm() / n;
  }
  const double mse = acc / static_cast<double>(truth.states.size() - 1);
  return std::isfinite(mse) ? mse : std::numeric_limits<double>::infinity();
}

EvalReport evaluate_mse(const Trajectory& estimates, const Trajectory& truth) {
  EvalReport r;
  r.per_trajectory.push_back(trajectory_mse(estimates, truth));
  r.aggregate = r.per_trajectory.front();
  return r;
}

EvalReport evaluate_mse(const std::vector<Trajectory>& estimates, const std::vector<Trajectory>& truth) {
  if (estimates.size() != truth.size()) throw DimensionMismatch("evaluate_mse: trajectory count mismatch");
  require(!truth.empty(), "evaluate_mse: no trajectories");
  EvalReport r;
  double steps = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double m = trajectory_mse(estimates[i], truth[i]);
    r.per_trajectory.push_back(m);
    const double w = static_cast<double>(truth[i].steps());
    acc += m * w;
    steps += w;
  }
  r.aggregate = steps > 0.0 ? acc / steps : 0.0;
  if (!std::isfinite(r.aggregate)) r.aggregate = std::numeric_limits<double>::infinity();
  return r;
}

EvalReport evaluate_predictor(const Predictor& predict, const std::vector<Trajectory>& measured,
                              const std::vector<Trajectory>& truth, std::vector<Trajectory>* estimates) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Trajectory> est;
  est.reserve(measured.size());
  for (const auto& m : measured) est.push_back(rollout(predict, m));
  EvalReport r = evaluate_mse(est, truth);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (estimates != nullptr) *estimates = std::move(est);
  return r;
}

Vector HybridEnv::step(const Vector& x_hat, const Vector&, const Vector& action) const {
  return base_.predict_with_action(x_hat, action);
}

Predictor hybrid_predictor(const HybridEstimator& est) {
  return [&est](const Vector& x_hat, const Vector& x_meas) { return est.predict_next(x_hat, x_meas); };
}

Predictor rl_only_predictor(const Policy& policy) {
  return [&policy](const Vector& x_hat, const Vector& x_meas) { return policy.act(x_meas, x_hat); };
}

RlOnlyResult rl_only_baseline(const std::vector<Trajectory>& trajectories, double action_scale,
                              const StateEncoding& encoding, const TrainConfig& config) {
  require(!trajectories.empty(), "rl_only_baseline: no trajectories");
  const std::size_t n = trajectories.front().dimension();
  Agent agent = make_agent(n, n, action_scale, encoding, config);
  RlOnlyEnv env(n);
  TrainResult history = train(agent, env, trajectories, config);
  return RlOnlyResult{agent.policy(), std::move(history)};
}

}  // namespace koopest
