#include "koopest/ddpg.hpp"

#include <chrono>
#include <cmath>

namespace koopest {

StateEncoding StateEncoding::unit(std::size_t n) { return uniform(n, 1.0, 1.0); }

StateEncoding StateEncoding::uniform(std::size_t n, double state_scale, double error_scale) {
  require(state_scale > 0.0 && error_scale > 0.0, "encoding scales must be positive");
  const auto dim = static_cast<Eigen::Index>(n);
  return StateEncoding{Vector::Constant(dim, state_scale), Vector::Constant(dim, error_scale)};
}

Vector StateEncoding::features(const Vector& measured, const Vector& estimated) const {
  const Eigen::Index n = state_scale.size();
  require_dims(measured.size(), n, "measured state");
  require_dims(estimated.size(), n, "estimated state");
  Vector f(2 * n);
  f.head(n) = measured.cwiseQuotient(state_scale);
  f.tail(n) = (measured - estimated).cwiseQuotient(error_scale);
  return f;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity_ >= 1, "replay capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++inserted_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw InvalidArgument("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
  require(!items_.empty(), "cannot sample an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&items_[pick(rng)]);
  return out;
}

NoiseProcess::NoiseProcess(NoiseConfig config, std::size_t dim, double action_scale, std::uint64_t seed)
    : config_(std::move(config)),
      action_scale_(action_scale),
      state_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      rng_(seed) {
  require(config_.decay > 0.0 && config_.decay <= 1.0, "noise decay must lie in (0, 1]");
  reset(0);
}

void NoiseProcess::reset(std::size_t episode) {
  const double base = std::visit([](const auto& k) { return k.sigma; }, config_.kind);
  require(base >= 0.0, "noise sigma must be >= 0");
  sigma_ = base * action_scale_ * std::pow(config_.decay, static_cast<double>(episode));
  state_.setZero();
}

Vector NoiseProcess::sample() {
  Vector draw(state_.size());
  for (Eigen::Index i = 0; i < draw.size(); ++i) draw(i) = gauss_(rng_);
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&config_.kind)) {
    state_ += -ou->theta * state_ + sigma_ * draw;
    return state_;
  }
  return sigma_ * draw;
}

Vector Policy::act(const Vector& measured, const Vector& estimated) const {
  return actor.forward(encoding.features(measured, estimated));
}

Agent make_agent(std::size_t state_dim, std::size_t action_dim, double action_scale, StateEncoding encoding,
                 const TrainConfig& config) {
  require(state_dim >= 1 && action_dim >= 1, "agent dims must be >= 1");
  require_dims(static_cast<Eigen::Index>(encoding.state_dim()), static_cast<Eigen::Index>(state_dim),
               "encoding dimension");
  const int in = static_cast<int>(2 * state_dim);
  std::vector<int> actor_dims{in};
  std::vector<int> critic_dims{in + static_cast<int>(action_dim)};
  for (int h : config.hidden) {
    actor_dims.push_back(h);
    critic_dims.push_back(h);
  }
  actor_dims.push_back(static_cast<int>(action_dim));
  critic_dims.push_back(1);

  Agent agent{
      init_mlp(actor_dims, OutputActivation::ScaledTanh, action_scale, derive_seed(config.seed, 1),
               config.final_layer_range),
      init_mlp(critic_dims, OutputActivation::Linear, 1.0, derive_seed(config.seed, 2), config.final_layer_range),
      Mlp(),
      Mlp(),
      std::move(encoding),
      ReplayBuffer(config.buffer_capacity),
      AdamState(),
      AdamState(),
  };
  agent.actor_target = agent.actor;
  agent.critic_target = agent.critic;
  agent.actor_opt = make_adam(agent.actor, config.actor_lr);
  agent.critic_opt = make_adam(agent.critic, config.critic_lr);
  return agent;
}

namespace {

struct BatchMatrices {
  Matrix s_feat;
  Matrix s_next_feat;
  Matrix actions;
  Vector rewards;
};

BatchMatrices stack(const Agent& agent, const std::vector<const Transition*>& batch) {
  require(!batch.empty(), "batch must be nonempty");
  const auto n2 = static_cast<Eigen::Index>(2 * agent.encoding.state_dim());
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto ad = static_cast<Eigen::Index>(agent.action_dim());
  BatchMatrices m{Matrix(n2, b), Matrix(n2, b), Matrix(ad, b), Vector(b)};
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[static_cast<std::size_t>(j)];
    require_dims(t.a.size(), ad, "transition action");
    m.s_feat.col(j) = agent.encoding.features(t.s.measured, t.s.estimated);
    m.s_next_feat.col(j) = agent.encoding.features(t.s_next.measured, t.s_next.estimated);
    m.actions.col(j) = t.a;
    m.rewards(j) = t.reward;
  }
  return m;
}

}  // namespace

Matrix critic_input(const Agent& agent, const Matrix& features, const Matrix& actions) {
  Matrix in(features.rows() + actions.rows(), features.cols());
  in.topRows(features.rows()) = features;
  in.bottomRows(actions.rows()) = actions / agent.action_scale();
  return in;
}

Vector select_action(const Agent& agent, const RlState& s, NoiseProcess* noise) {
  Vector a = agent.actor.forward(agent.encoding.features(s.measured, s.estimated));
  if (noise != nullptr) a += noise->sample();
  return a;
}

double compute_reward(const Vector& measured, const Vector& estimated) {
  require_dims(estimated.size(), measured.size(), "reward states");
  return -(measured - estimated).squaredNorm();
}

CriticLossResult critic_loss(const Agent& agent, const std::vector<const Transition*>& batch, double gamma,
                             double reward_scale) {
  const BatchMatrices m = stack(agent, batch);
  const Eigen::Index b = m.rewards.size();
  const double inv_b = 1.0 / static_cast<double>(b);

  const Matrix a_next = agent.actor_target.forward_batch(m.s_next_feat);
  const Matrix next_in = critic_input(agent, m.s_next_feat, a_next);
  const Matrix q_target = agent.critic_target.forward_batch(next_in);

  Mlp::Cache cache_sa;
  Mlp::Cache cache_next;
  const Matrix q = agent.critic.forward_batch(critic_input(agent, m.s_feat, m.actions), cache_sa);
  const Matrix q_current_next = agent.critic.forward_batch(next_in, cache_next);

  CriticLossResult out;
  out.per_sample.resize(static_cast<std::size_t>(b));
  out.msbe_branch.resize(static_cast<std::size_t>(b));
  Matrix up_sa(1, b);
  Matrix up_next = Matrix::Zero(1, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const double r = reward_scale * m.rewards(j);
    const double d1 = r + gamma * q_target(0, j) - q(0, j);
    const double d2 = r + gamma * q_current_next(0, j) - q(0, j);
    const double l1 = d1 * d1;
    const double l2 = d2 * d2;
    out.ddpg_loss += l1 * inv_b;
    out.msbe_loss += l2 * inv_b;
    const bool msbe = l2 > l1;
    out.msbe_branch[static_cast<std::size_t>(j)] = msbe;
    out.per_sample[static_cast<std::size_t>(j)] = msbe ? l2 : l1;
    out.loss += (msbe ? l2 : l1) * inv_b;
    const double d = msbe ? d2 : d1;
    up_sa(0, j) = -2.0 * d * inv_b;
    if (msbe) up_next(0, j) = 2.0 * d * gamma * inv_b;
  }
  out.grads = agent.critic.zero_gradients();
  agent.critic.backward(cache_sa, up_sa, out.grads);
  if (gamma != 0.0) agent.critic.backward(cache_next, up_next, out.grads);
  return out;
}

ActorGradient actor_loss_gradient(const Agent& agent, const std::vector<const Transition*>& batch) {
  const BatchMatrices m = stack(agent, batch);
  const Eigen::Index b = m.rewards.size();
  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
  const Matrix mu = agent.actor.forward_batch(m.s_feat, actor_cache);
  const Matrix q = agent.critic.forward_batch(critic_input(agent, m.s_feat, mu), critic_cache);

  ActorGradient out;
  out.objective = -q.sum() / static_cast<double>(b);
  GradientBundle critic_scratch = agent.critic.zero_gradients();
  const Matrix up = Matrix::Constant(1, b, -1.0 / static_cast<double>(b));
  const Matrix in_grad = agent.critic.backward(critic_cache, up, critic_scratch);
  const Matrix da = in_grad.bottomRows(mu.rows()) / agent.action_scale();
  out.grads = agent.actor.zero_gradients();
  agent.actor.backward(actor_cache, da, out.grads);
  return out;
}

TrainResult train(Agent& agent, const EstimatorEnv& env, const std::vector<Trajectory>& trajectories,
                  const TrainConfig& config) {
  require(!trajectories.empty(), "training needs at least one trajectory");
  require(config.batch_size >= 1, "batch size must be >= 1");
  require(config.target_period >= 1, "target period must be >= 1");
  require(config.gamma >= 0.0 && config.gamma < 1.0, "gamma must lie in [0, 1)");
  require_dims(static_cast<Eigen::Index>(env.action_dim()), static_cast<Eigen::Index>(agent.action_dim()),
               "environment action dimension");
  const auto start = std::chrono::steady_clock::now();

  std::mt19937_64 rng(derive_seed(config.seed, 3));
  NoiseProcess noise(config.noise, agent.action_dim(), agent.action_scale(), derive_seed(config.seed, 4));
  TrainResult result;

  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    const Trajectory& traj = trajectories[ep % trajectories.size()];
    require(!traj.states.empty(), "training trajectory is empty");
    noise.reset(ep);
    std::size_t steps = traj.steps();
    if (config.max_steps > 0) steps = std::min(steps, config.max_steps);

    Vector x_hat = traj.states.front();
    double total = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const Vector& x_meas = traj.states[k];
      const Vector& x_next_meas = traj.states[k + 1];
      RlState s{env.observe(x_meas), env.observe(x_hat)};
      const Vector a = select_action(agent, s, &noise);
      Vector x_next = env.step(x_hat, x_meas, a);

      const bool finite = x_next.allFinite();
      double reward;
      if (!finite && config.divergence_threshold > 0.0) {
        reward = -static_cast<double>(x_next.size()) * config.divergence_threshold * config.divergence_threshold;
      } else {
        reward = compute_reward(x_next_meas, x_next);
      }
      if (config.divergence_threshold > 0.0 &&
          (!finite || (x_next - x_next_meas).cwiseAbs().maxCoeff() > config.divergence_threshold)) {
        x_next = x_next_meas;
        ++result.divergence_resets;
      }
      total += reward;
      agent.buffer.push(Transition{std::move(s), a, reward, RlState{env.observe(x_next_meas), env.observe(x_next)}});
      x_hat = x_next;

      const auto batch = agent.buffer.sample(std::min(config.batch_size, agent.buffer.size()), rng);
      CriticLossResult cl = critic_loss(agent, batch, config.gamma, config.reward_scale);
      if (!std::isfinite(cl.loss) || !cl.grads.all_finite()) {
        throw TrainingDivergence("critic loss became non-finite at episode " + std::to_string(ep) + ", step " +
                                 std::to_string(k) + " (reward " + std::to_string(reward) + ")");
      }
      adam_step(agent.critic, cl.grads, agent.critic_opt);
      ActorGradient ag = actor_loss_gradient(agent, batch);
      if (!ag.grads.all_finite()) {
        throw TrainingDivergence("actor gradient became non-finite at episode " + std::to_string(ep) +
                                 ", step " + std::to_string(k));
      }
      adam_step(agent.actor, ag.grads, agent.actor_opt);

      ++result.optimizer_steps;
      if (result.optimizer_steps % config.target_period == 0) {
        copy_weights(agent.actor, agent.actor_target);
        copy_weights(agent.critic, agent.critic_target);
        ++result.target_updates;
      }
      result.log.push_back(TrainLogRow{ep, k, reward, cl.loss, ag.grads.norm()});
    }
    result.episode_rewards.push_back(total);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace koopest
