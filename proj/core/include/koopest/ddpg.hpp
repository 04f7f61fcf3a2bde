#pragma once

#include "koopest/dynamics.hpp"
#include "koopest/mlp.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

namespace koopest {

// Fixed affine normalization of the RL state s = (measured, estimated) fed to
// the networks: (measured / state_scale, (measured - estimated) / error_scale).
// The map is invertible, so the networks still see the full pair.
struct StateEncoding {
  Vector state_scale;
  Vector error_scale;

  static StateEncoding unit(std::size_t n);
  static StateEncoding uniform(std::size_t n, double state_scale, double error_scale);
  std::size_t state_dim() const { return static_cast<std::size_t>(state_scale.size()); }
  Vector features(const Vector& measured, const Vector& estimated) const;
};

struct RlState {
  Vector measured;
  Vector estimated;
};

struct Transition {
  RlState s;
  Vector a;
  double reward = 0.0;
  RlState s_next;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  void push(Transition t);
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t inserted() const noexcept { return inserted_; }
  // i-th stored transition, oldest first.
  const Transition& at(std::size_t i) const;
  std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;
  std::uint64_t inserted_ = 0;
};

struct OrnsteinUhlenbeck {
  double theta = 0.15;
  double sigma = 0.2;
};
struct GaussianNoise {
  double sigma = 0.2;
};

// Exploration noise. sigma is a fraction of the actor's action scale and is
// multiplied by decay^episode.
struct NoiseConfig {
  std::variant<OrnsteinUhlenbeck, GaussianNoise> kind = OrnsteinUhlenbeck{};
  double decay = 0.995;
};

class NoiseProcess {
 public:
  NoiseProcess(NoiseConfig config, std::size_t dim, double action_scale, std::uint64_t seed);

  void reset(std::size_t episode);
  Vector sample();
  double current_sigma() const noexcept { return sigma_; }

 private:
  NoiseConfig config_;
  double action_scale_;
  double sigma_ = 0.0;
  Vector state_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

struct TrainConfig {
  double gamma = 0.99;
  std::size_t batch_size = 64;
  std::size_t target_period = 10;
  std::size_t episodes = 20;
  std::size_t max_steps = 0;  // 0: use every step of the trajectory
  std::size_t buffer_capacity = 100000;
  NoiseConfig noise;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<int> hidden = {64, 64, 64};
  double final_layer_range = 3e-3;
  // Rewards are multiplied by this before entering the critic targets.
  double reward_scale = 1.0;
  // Estimates farther than this (max-norm) from the next measurement are
  // reset to it after the reward is recorded. 0 disables the reset.
  double divergence_threshold = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic actor together with its input encoding.
struct Policy {
  Mlp actor;
  StateEncoding encoding;

  std::size_t action_dim() const { return static_cast<std::size_t>(actor.output_dim()); }
  double action_scale() const { return actor.output_scale(); }
  Vector act(const Vector& measured, const Vector& estimated) const;
};

struct Agent {
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
  StateEncoding encoding;
  ReplayBuffer buffer;
  AdamState actor_opt;
  AdamState critic_opt;

  double action_scale() const { return actor.output_scale(); }
  std::size_t action_dim() const { return static_cast<std::size_t>(actor.output_dim()); }
  Policy policy() const { return Policy{actor, encoding}; }
};

Agent make_agent(std::size_t state_dim, std::size_t action_dim, double action_scale, StateEncoding encoding,
                 const TrainConfig& config);

// Critic input for a batch: encoded states stacked over actions / action_scale.
Matrix critic_input(const Agent& agent, const Matrix& features, const Matrix& actions);

Vector select_action(const Agent& agent, const RlState& s, NoiseProcess* noise);

double compute_reward(const Vector& measured, const Vector& estimated);

struct CriticLossResult {
  double loss = 0.0;
  double ddpg_loss = 0.0;  // batch mean of the target-critic branch
  double msbe_loss = 0.0;  // batch mean of the current-critic branch
  std::vector<double> per_sample;
  std::vector<bool> msbe_branch;
  GradientBundle grads;
};

// Max-of-two-losses critic objective. Ties take the target-critic branch.
CriticLossResult critic_loss(const Agent& agent, const std::vector<const Transition*>& batch, double gamma,
                             double reward_scale = 1.0);

struct ActorGradient {
  double objective = 0.0;  // batch mean of -Q(s, mu(s))
  GradientBundle grads;
};

ActorGradient actor_loss_gradient(const Agent& agent, const std::vector<const Transition*>& batch);

// One-step estimator dynamics driven by an action.
class EstimatorEnv {
 public:
  virtual ~EstimatorEnv() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual Vector step(const Vector& x_hat, const Vector& x_meas, const Vector& action) const = 0;
  // Coordinates in which the policy sees a state. Rewards stay in env coordinates.
  virtual Vector observe(const Vector& state) const { return state; }
};

struct TrainLogRow {
  std::size_t episode = 0;
  std::size_t step = 0;
  double reward = 0.0;
  double critic_loss = 0.0;
  double actor_grad_norm = 0.0;
};

struct TrainResult {
  std::vector<double> episode_rewards;
  std::vector<TrainLogRow> log;
  std::size_t optimizer_steps = 0;
  std::size_t target_updates = 0;
  std::size_t divergence_resets = 0;
  double seconds = 0.0;
};

TrainResult train(Agent& agent, const EstimatorEnv& env, const std::vector<Trajectory>& trajectories,
                  const TrainConfig& config);

}  // namespace koopest
