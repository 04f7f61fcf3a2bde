#pragma once

#include "koopest/config.hpp"
#include "koopest/edmd.hpp"
#include "koopest/estimator.hpp"
#include "koopest/mlp.hpp"
#include "koopest/transfer.hpp"

#include <string>
#include <vector>

namespace koopest {

inline constexpr const char* kVersion = "0.1.0";

struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

std::string dictionary_to_json(const PolynomialDictionary& dict);
PolynomialDictionary dictionary_from_json(const std::string& text);

std::string model_to_json(const KoopmanModel& model, const Provenance& prov);
KoopmanModel model_from_json(const std::string& text);

std::string network_to_json(const Mlp& net);
Mlp network_from_json(const std::string& text);

std::string policy_to_json(const Policy& policy, const Provenance& prov);
Policy policy_from_json(const std::string& text);

struct TransferBundle {
  Diffeomorphism h;
  MapFit O1;
  MapFit O2;
  double eps = 0.0;
};

std::string transfer_bundle_to_json(const TransferBundle& bundle, const Provenance& prov);
TransferBundle transfer_bundle_from_json(const std::string& text);

// `t,x1,...,xn` with 17 significant digits.
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text);

std::string rollout_to_csv(const Trajectory& truth, const Trajectory& estimates);
std::string train_log_to_csv(const std::vector<TrainLogRow>& log);
std::string episode_rewards_to_csv(const std::vector<double>& rewards);
// Two rows, transferred and random, one column per episode.
std::string finetune_to_csv(const std::vector<double>& transferred, const std::vector<double>& random);

std::string eval_report_to_json(const std::vector<std::pair<std::string, EvalReport>>& reports,
                                const Provenance& prov);

}  // namespace koopest
