#pragma once

#include "koopest/config.hpp"
#include "koopest/estimator.hpp"
#include "koopest/transfer.hpp"

#include <optional>
#include <vector>

namespace koopest {

struct ExperimentData {
  std::vector<Trajectory> train_clean;
  std::vector<Trajectory> train_measured;
  std::vector<Trajectory> test_clean;
  std::vector<Trajectory> test_measured;
};

ExperimentData generate_data(const ExperimentConfig& cfg, std::uint64_t seed);

// z = h(x) for every clean trajectory, with fresh measurement noise per cfg.
ExperimentData map_data(const ExperimentData& x_data, const Diffeomorphism& h, const ExperimentConfig& cfg,
                        std::uint64_t seed);

KoopmanModel fit_model(const ExperimentConfig& cfg, const std::vector<Trajectory>& measured);

struct HybridRun {
  KoopmanModel model;
  Agent agent;
  TrainResult history;
  double fit_seconds = 0.0;
};

Agent make_hybrid_agent(const ExperimentConfig& cfg, const KoopmanModel& model, std::uint64_t seed);

// Fits EDMD on the measured training data and trains the corrective actor.
HybridRun run_hybrid(const ExperimentConfig& cfg, const std::vector<Trajectory>& measured, std::uint64_t seed);

RlOnlyResult run_rl_only(const ExperimentConfig& cfg, const std::vector<Trajectory>& measured, std::uint64_t seed);

struct TransferRun {
  Diffeomorphism h;
  MapFit O1;
  MapFit O2;
  std::optional<TransferredEstimator> fitted;
  double seconds = 0.0;
};

// Builds O1, O2 and the Lipschitz estimate from source data only.
TransferRun build_transfer(const ExperimentConfig& cfg, const HybridEstimator& source,
                           const std::vector<Trajectory>& source_measured, std::uint64_t seed);

}  // namespace koopest
