#include "koopest/transfer.hpp"

#include "koopest/linalg.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace koopest {

Diffeomorphism::Diffeomorphism(Vector cubic, Vector linear, double domain_radius)
    : cubic_(std::move(cubic)), linear_(std::move(linear)), radius_(domain_radius) {
  require(linear_.size() >= 1, "diffeomorphism dimension must be >= 1");
  require_dims(cubic_.size(), linear_.size(), "diffeomorphism coefficients");
  require(radius_ > 0.0, "diffeomorphism domain radius must be positive");
  for (Eigen::Index i = 0; i < linear_.size(); ++i) {
    require(linear_(i) > 0.0, "linear coefficients must be positive");
    require(cubic_(i) >= 0.0, "cubic coefficients must be non-negative");
  }
}

Diffeomorphism Diffeomorphism::identity(std::size_t n, double domain_radius) {
  const auto dim = static_cast<Eigen::Index>(n);
  return Diffeomorphism(Vector::Zero(dim), Vector::Ones(dim), domain_radius);
}

Diffeomorphism Diffeomorphism::cubic_example(double domain_radius) {
  Vector c(2);
  Vector l(2);
  c << 1.0, 0.0;
  l << 1.0, 2.0;
  return Diffeomorphism(c, l, domain_radius);
}

bool Diffeomorphism::is_identity() const { return cubic_.isZero(0.0) && (linear_.array() == 1.0).all(); }

std::string Diffeomorphism::tag() const { return is_identity() ? "identity" : "componentwise_cubic"; }

Vector Diffeomorphism::apply(const Vector& x) const {
  require_dims(x.size(), linear_.size(), "diffeomorphism input");
  return (cubic_.array() * x.array().cube() + linear_.array() * x.array()).matrix();
}

Vector Diffeomorphism::apply_inverse(const Vector& z) const {
  require_dims(z.size(), linear_.size(), "diffeomorphism input");
  if (!z.allFinite()) throw InversionError("cannot invert a non-finite point");
  Vector x(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = cubic_(i);
    const double b = linear_(i);
    const double zi = z(i);
    if (a == 0.0) {
      x(i) = zi / b;
      continue;
    }
    // |z| = a|x|^3 + b|x| >= b|x| brackets the root
    double lo = -std::abs(zi) / b;
    double hi = std::abs(zi) / b;
    double xi = std::cbrt(zi / a);
    if (xi < lo || xi > hi) xi = zi / b;
    const double tol = 1e-15 * std::max(1.0, std::abs(zi));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const double f = a * xi * xi * xi + b * xi - zi;
      if (std::abs(f) <= tol) {
        converged = true;
        break;
      }
      if (f > 0.0) hi = xi; else lo = xi;
      double next = xi - f / (3.0 * a * xi * xi + b);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == xi || hi - lo <= 1e-16 * std::max(1.0, std::abs(xi))) {
        xi = next;
        converged = true;
        break;
      }
      xi = next;
    }
    if (!converged) {
      throw InversionError("Newton inversion did not converge for coordinate " + std::to_string(i));
    }
    x(i) = xi;
  }
  return x;
}

double estimate_lipschitz(Diffeomorphism& d, std::size_t pairs, std::uint64_t seed, double safety) {
  require(pairs >= 1, "lipschitz estimate needs at least one pair");
  require(safety >= 1.0, "safety factor must be >= 1");
  const std::size_t n = d.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_ball = [&]() {
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& e : v) e = gauss(rng);
    const double radius = d.domain_radius() * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    return Vector(v.normalized() * radius);
  };
  double best = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Vector x = in_ball();
    Vector y;
    if (i % 2 == 0) {
      y = in_ball();
    } else {
      // nearby pairs probe the local derivative
      Vector dir(static_cast<Eigen::Index>(n));
      for (auto& e : dir) e = gauss(rng);
      y = x + 1e-4 * d.domain_radius() * dir.normalized();
      if (y.norm() > d.domain_radius()) y = x - (y - x);
    }
    const double den = (x - y).squaredNorm();
    if (den == 0.0) continue;
    best = std::max(best, (d.apply(x) - d.apply(y)).squaredNorm() / den);
  }
  const double k = safety * best;
  d.set_lipschitz(k);
  return k;
}

MapFit fit_linear_map(const Matrix& target, const Matrix& source) {
  require_dims(source.cols(), target.cols(), "map fit sample count");
  require(source.cols() > 0, "map fit needs samples");
  MapFit fit;
  fit.O = target * pinv(source);
  fit.residual = (target - fit.O * source).norm();
  const double scale = target.norm();
  fit.relative_residual = scale > 0.0 ? fit.residual / scale : 0.0;
  fit.rank = numerical_rank(source);
  fit.rank_deficient = fit.rank < source.rows();
  return fit;
}

MapFit fit_O1(const KoopmanModel& model, const std::vector<Vector>& measured_states, const Diffeomorphism& d) {
  require(measured_states.size() >= model.rank(), "fit_O1 needs at least r samples");
  const auto r = static_cast<Eigen::Index>(model.rank());
  const auto m = static_cast<Eigen::Index>(measured_states.size());
  Matrix target(r, m);
  Matrix source(r, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector& x = measured_states[static_cast<std::size_t>(j)];
    target.col(j) = project(model, x);
    source.col(j) = project(model, d.apply(x));
  }
  return fit_linear_map(target, source);
}

MapFit fit_O2(const Policy& policy, const std::vector<StatePair>& pairs, const Diffeomorphism& d) {
  const auto r = static_cast<Eigen::Index>(policy.action_dim());
  require(pairs.size() >= policy.action_dim(), "fit_O2 needs at least r pairs");
  const auto m = static_cast<Eigen::Index>(pairs.size());
  Matrix target(r, m);
  Matrix source(r, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const StatePair& p = pairs[static_cast<std::size_t>(j)];
    target.col(j) = policy.act(p.measured, p.estimated);
    source.col(j) = policy.act(d.apply(p.measured), d.apply(p.estimated));
  }
  return fit_linear_map(target, source);
}

std::vector<StatePair> collect_state_pairs(const HybridEstimator& est, const std::vector<Trajectory>& measured) {
  std::vector<StatePair> pairs;
  for (const auto& traj : measured) {
    const Trajectory hat = rollout(est, traj);
    for (std::size_t k = 0; k < traj.states.size(); ++k) pairs.push_back({hat.states[k], traj.states[k]});
  }
  return pairs;
}

TransferredEstimator::TransferredEstimator(KoopmanModel model, std::optional<Policy> policy, Matrix O1, Matrix O2)
    : model_(std::move(model)), policy_(std::move(policy)), pu_(model_.PU()) {
  set_maps(std::move(O1), std::move(O2));
}

void TransferredEstimator::set_maps(Matrix O1, Matrix O2) {
  const auto r = static_cast<Eigen::Index>(model_.rank());
  require(O1.rows() == r && O1.cols() == r, "O1 must be r x r");
  require(O2.rows() == r && O2.cols() == r, "O2 must be r x r");
  O1_ = std::move(O1);
  O2_ = std::move(O2);
  refresh();
}

void TransferredEstimator::refresh() {
  const Matrix O1_pinv = pinv(O1_);
  composed_ = O1_pinv * model_.A_r * O1_;
  action_map_ = O1_pinv * O2_;
}

Vector TransferredEstimator::predict_with_action(const Vector& z_hat, const Vector& action) const {
  return pu_ * (composed_ * project(model_, z_hat) + action_map_ * action);
}

Vector TransferredEstimator::predict(const Vector& z_hat, const Vector& z_meas) const {
  Vector lifted = composed_ * project(model_, z_hat);
  if (policy_) lifted += action_map_ * policy_->act(z_meas, z_hat);
  return pu_ * lifted;
}

Vector transferred_predict(const TransferredEstimator& te, const Vector& z_hat, const Vector& z_meas) {
  return te.predict(z_hat, z_meas);
}

Vector exact_transfer_predict(const HybridEstimator& est, const Diffeomorphism& d, const Vector& z_hat,
                              const Vector& z_meas) {
  return d.apply(est.predict_next(d.apply_inverse(z_hat), d.apply_inverse(z_meas)));
}

Vector residual_action(const KoopmanModel& model, const Vector& x_next, const Vector& x_hat) {
  return project(model, x_next) - model.A_r * project(model, x_hat);
}

Vector exact_residual_action(const KoopmanModel& model, const Vector& x_next, const Vector& x_hat) {
  const Matrix pu = model.PU();
  return pinv(pu) * (x_next - pu * model.A_r * project(model, x_hat));
}

BoundReport check_error_bound(double K, double eps, const std::vector<ErrorSample>& errors, double tolerance) {
  require(K >= 0.0 && eps >= 0.0, "bound constants must be non-negative");
  BoundReport r;
  r.K = K;
  r.eps = eps;
  r.bound = K * eps;
  r.tolerance = tolerance;
  for (const auto& e : errors) {
    r.max_error = std::max(r.max_error, e.squared_error);
    if (!(e.squared_error <= r.bound + tolerance)) r.violations.push_back(e);
  }
  r.margin = r.bound + tolerance - r.max_error;
  r.holds = r.violations.empty();
  return r;
}

double residual_gap(const HybridEstimator& est, const std::vector<Trajectory>& measured,
                    const std::vector<Trajectory>& truth) {
  require(measured.size() == truth.size(), "residual_gap: trajectory count mismatch");
  double eps = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const Trajectory hat = rollout(est, measured[i]);
    for (std::size_t k = 0; k + 1 < measured[i].states.size(); ++k) {
      const Vector a_star = exact_residual_action(est.model(), truth[i].states[k + 1], hat.states[k]);
      const Vector a = est.action(hat.states[k], measured[i].states[k]);
      eps = std::max(eps, (a - a_star).squaredNorm());
    }
  }
  return eps;
}

std::vector<ErrorSample> exact_transfer_errors(const HybridEstimator& est, const Diffeomorphism& d,
                                               const std::vector<Trajectory>& z_measured,
                                               const std::vector<Trajectory>& z_truth, bool oracle) {
  require(z_measured.size() == z_truth.size(), "exact_transfer_errors: trajectory count mismatch");
  std::vector<ErrorSample> out;
  for (std::size_t i = 0; i < z_measured.size(); ++i) {
    const Trajectory& zm = z_measured[i];
    Vector z_hat = zm.states.front();
    for (std::size_t k = 0; k + 1 < zm.states.size(); ++k) {
      Vector z_next;
      if (oracle) {
        const Vector x_hat = d.apply_inverse(z_hat);
        const Vector x_next = d.apply_inverse(z_truth[i].states[k + 1]);
        const Vector a = exact_residual_action(est.model(), x_next, x_hat);
        z_next = d.apply(est.predict_with_action(x_hat, a));
      } else {
        z_next = exact_transfer_predict(est, d, z_hat, zm.states[k]);
      }
      out.push_back({i, k, (z_next - z_truth[i].states[k + 1]).squaredNorm()});
      z_hat = z_next;
    }
  }
  return out;
}

Vector PullbackEnv::step(const Vector& z_hat, const Vector&, const Vector& action) const {
  return d_.apply(base_.predict_with_action(d_.apply_inverse(z_hat), action));
}

FinetuneResult warm_start_finetune(const std::optional<Policy>& init, const EstimatorEnv& env,
                                   const std::vector<Trajectory>& z_trajectories, const TrainConfig& config,
                                   double action_scale, const StateEncoding& encoding) {
  Agent agent = make_agent(env.state_dim(), env.action_dim(), action_scale, encoding, config);
  if (init) {
    copy_weights(init->actor, agent.actor);
    copy_weights(init->actor, agent.actor_target);
    agent.encoding = init->encoding;
  }
  FinetuneResult out{std::move(agent), TrainResult{}};
  if (config.episodes > 0) out.history = train(out.agent, env, z_trajectories, config);
  return out;
}

}  // namespace koopest
