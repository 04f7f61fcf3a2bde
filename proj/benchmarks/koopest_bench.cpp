#include <koopest/experiment.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace koopest;

namespace {

std::vector<Trajectory> toy_trajectories(std::size_t count, std::size_t steps) {
  std::vector<Trajectory> out;
  for (const auto& x0 : sample_initial_conditions(Disk{10.0}, count, 1)) {
    out.push_back(simulate(DynamicalSystem::toy(), x0, 0.1, steps));
  }
  return out;
}

void BM_Lift(benchmark::State& state) {
  const PolynomialDictionary d = build_dictionary(2, static_cast<int>(state.range(0)), false, 20.0);
  Vector x(2);
  x << 3.0, -4.0;
  for (auto _ : state) benchmark::DoNotOptimize(d.lift(x));
}
BENCHMARK(BM_Lift)->Arg(3)->Arg(10);

void BM_FitReduced(benchmark::State& state) {
  const PolynomialDictionary d = build_dictionary(2, static_cast<int>(state.range(0)), false, 20.0);
  const SnapshotDataset data = build_snapshot_dataset(toy_trajectories(20, 200));
  for (auto _ : state) benchmark::DoNotOptimize(fit_reduced(d, data, EnergyThreshold{0.99}));
}
BENCHMARK(BM_FitReduced)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MlpForwardBackward(benchmark::State& state) {
  const Mlp net = init_mlp({4, 64, 64, 64, 5}, OutputActivation::ScaledTanh, 0.5, 1);
  const Matrix x = Matrix::Random(4, state.range(0));
  const Matrix up = Matrix::Ones(5, state.range(0));
  for (auto _ : state) {
    Mlp::Cache cache;
    net.forward_batch(x, cache);
    GradientBundle g = net.zero_gradients();
    benchmark::DoNotOptimize(net.backward(cache, up, g));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(64);

void BM_CriticLoss(benchmark::State& state) {
  TrainConfig cfg;
  const Agent agent = make_agent(2, 5, 0.5, StateEncoding::unit(2), cfg);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Transition> ts;
  for (int i = 0; i < 64; ++i) {
    ts.push_back(Transition{RlState{Vector::Random(2), Vector::Random(2)}, 0.1 * Vector::Random(5), -std::abs(g(rng)),
                            RlState{Vector::Random(2), Vector::Random(2)}});
  }
  std::vector<const Transition*> batch;
  for (const auto& t : ts) batch.push_back(&t);
  for (auto _ : state) benchmark::DoNotOptimize(critic_loss(agent, batch, 0.99).loss);
}
BENCHMARK(BM_CriticLoss);

void BM_PredictNext(benchmark::State& state) {
  const KoopmanModel m =
      fit_reduced(build_dictionary(2, 10, false, 20.0), build_snapshot_dataset(toy_trajectories(20, 200)),
                  EnergyThreshold{0.99});
  TrainConfig cfg;
  const Agent agent = make_agent(2, m.rank(), 0.5, StateEncoding::unit(2), cfg);
  const HybridEstimator est(m, agent.policy());
  Vector x(2);
  x << 1.0, 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(est.predict_next(x, x));
}
BENCHMARK(BM_PredictNext);

}  // namespace

BENCHMARK_MAIN();
