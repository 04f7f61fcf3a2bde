#include "koopest/experiment.hpp"

#include <chrono>

namespace koopest {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Trajectory> noisy_copies(const std::vector<Trajectory>& clean, const NoiseSpec& noise,
                                     std::uint64_t seed, std::uint64_t stream) {
  std::vector<Trajectory> out;
  out.reserve(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    NoiseSpec spec = noise;
    spec.seed = derive_seed(seed, stream + i);
    out.push_back(add_measurement_noise(clean[i], spec));
  }
  return out;
}

}  // namespace

ExperimentData generate_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  const DynamicalSystem system = cfg.system.build();
  require(system.dimension() == 2 || cfg.system.kind == "custom", "initial-condition disk sampling is planar");
  ExperimentData data;
  const auto train_x0 = sample_initial_conditions(Disk{cfg.init_radius}, cfg.trajectories, derive_seed(seed, 10));
  for (const auto& x0 : train_x0) data.train_clean.push_back(simulate(system, x0, cfg.dt, cfg.steps));
  if (cfg.test_trajectories > 0) {
    const auto test_x0 =
        sample_initial_conditions(Disk{cfg.init_radius}, cfg.test_trajectories, derive_seed(seed, 11));
    for (const auto& x0 : test_x0) data.test_clean.push_back(simulate(system, x0, cfg.dt, cfg.test_steps));
  }
  data.train_measured = noisy_copies(data.train_clean, cfg.noise, seed, 1000);
  data.test_measured = noisy_copies(data.test_clean, cfg.noise, seed, 2000);
  return data;
}

ExperimentData map_data(const ExperimentData& x_data, const Diffeomorphism& h, const ExperimentConfig& cfg,
                        std::uint64_t seed) {
  auto push = [&](const std::vector<Trajectory>& src) {
    std::vector<Trajectory> out;
    for (const auto& t : src) {
      Trajectory z;
      z.dt = t.dt;
      for (const auto& x : t.states) z.states.push_back(h.apply(x));
      out.push_back(std::move(z));
    }
    return out;
  };
  ExperimentData z;
  z.train_clean = push(x_data.train_clean);
  z.test_clean = push(x_data.test_clean);
  z.train_measured = noisy_copies(z.train_clean, cfg.noise, seed, 3000);
  z.test_measured = noisy_copies(z.test_clean, cfg.noise, seed, 4000);
  return z;
}

KoopmanModel fit_model(const ExperimentConfig& cfg, const std::vector<Trajectory>& measured) {
  require(!measured.empty(), "no trajectories to fit");
  const PolynomialDictionary dict = cfg.dictionary.build(measured.front().dimension());
  return fit_reduced(dict, build_snapshot_dataset(measured), cfg.rank);
}

Agent make_hybrid_agent(const ExperimentConfig& cfg, const KoopmanModel& model, std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  return make_agent(model.state_dim(), model.rank(), cfg.estimator.action_scale,
                    cfg.estimator.encoding(model.state_dim()), tc);
}

HybridRun run_hybrid(const ExperimentConfig& cfg, const std::vector<Trajectory>& measured, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  KoopmanModel model = fit_model(cfg, measured);
  const double fit_seconds = seconds_since(t0);
  Agent agent = make_hybrid_agent(cfg, model, seed);
  const HybridEstimator base(model);
  HybridEnv env(base);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainResult history = train(agent, env, measured, tc);
  return HybridRun{std::move(model), std::move(agent), std::move(history), fit_seconds};
}

RlOnlyResult run_rl_only(const ExperimentConfig& cfg, const std::vector<Trajectory>& measured, std::uint64_t seed) {
  require(!measured.empty(), "no trajectories to train on");
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(seed, 5);
  const std::size_t n = measured.front().dimension();
  return rl_only_baseline(measured, cfg.estimator.rl_only_action_scale, cfg.estimator.encoding(n), tc);
}

TransferRun build_transfer(const ExperimentConfig& cfg, const HybridEstimator& source,
                           const std::vector<Trajectory>& source_measured, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = source.model().state_dim();
  TransferRun run{cfg.transfer.build(n), MapFit{}, MapFit{}, std::nullopt, 0.0};
  estimate_lipschitz(run.h, cfg.transfer.lipschitz_pairs, derive_seed(seed, 20), cfg.transfer.lipschitz_safety);

  std::vector<Vector> states;
  for (const auto& t : source_measured) states.insert(states.end(), t.states.begin(), t.states.end());
  run.O1 = fit_O1(source.model(), states, run.h);
  const auto r = static_cast<Eigen::Index>(source.model().rank());
  if (source.policy()) {
    run.O2 = fit_O2(*source.policy(), collect_state_pairs(source, source_measured), run.h);
  } else {
    run.O2.O = Matrix::Zero(r, r);
  }
  run.fitted.emplace(source.model(), source.policy(), run.O1.O, run.O2.O);
  run.seconds = seconds_since(t0);
  return run;
}

}  // namespace koopest
