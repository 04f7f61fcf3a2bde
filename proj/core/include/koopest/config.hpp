#pragma once

#include "koopest/ddpg.hpp"
#include "koopest/dictionary.hpp"
#include "koopest/dynamics.hpp"
#include "koopest/edmd.hpp"
#include "koopest/transfer.hpp"

#include <cstdint>
#include <string>

namespace koopest {

inline constexpr int kConfigSchemaVersion = 1;

struct SystemSpec {
  std::string kind = "toy";  // toy | van_der_pol | custom
  double alpha = 1.0;
  CustomPolynomial custom;

  DynamicalSystem build() const;
};

struct DictionarySpec {
  int max_degree = 10;
  bool include_constant = false;
  double scale = 1.0;
  std::vector<MultiIndex> terms;  // when nonempty, used verbatim instead of max_degree

  PolynomialDictionary build(std::size_t n) const;
};

struct EstimatorSpec {
  double action_scale = 5.0;
  double rl_only_action_scale = 5.0;
  double state_scale = 1.0;
  double error_scale = 1.0;

  StateEncoding encoding(std::size_t n) const { return StateEncoding::uniform(n, state_scale, error_scale); }
};

struct TransferSpec {
  std::string kind = "cubic";  // cubic | identity
  std::vector<double> cubic = {1.0, 0.0};
  std::vector<double> linear = {1.0, 2.0};
  double domain_radius = 10.0;
  std::size_t lipschitz_pairs = 100000;
  double lipschitz_safety = 1.1;
  std::size_t finetune_episodes = 3;
  std::string finetune_env = "pullback";  // pullback | fitted

  Diffeomorphism build(std::size_t n) const;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name = "toy";
  SystemSpec system;
  double dt = 0.1;
  std::size_t trajectories = 20;
  std::size_t steps = 200;
  double init_radius = 10.0;
  NoiseSpec noise;
  std::size_t test_trajectories = 3;
  std::size_t test_steps = 200;
  DictionarySpec dictionary;
  RankPolicy rank = EnergyThreshold{};
  TrainConfig train;
  EstimatorSpec estimator;
  TransferSpec transfer;
  std::uint64_t seed = 0;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// FNV-1a over the canonical JSON form.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace koopest
