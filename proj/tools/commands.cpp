#include "commands.hpp"

#include <koopest/experiment.hpp>
#include <koopest/io.hpp>

#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace koopest::cli {
namespace {

Provenance provenance(const ExperimentConfig& cfg, const std::string& command) {
  return Provenance{command, config_hash(cfg), cfg.seed, kVersion};
}

json provenance_json(const Provenance& p) {
  return {{"command", p.command}, {"config_hash", p.config_hash}, {"seed", p.seed}, {"version", p.version}};
}

std::string path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

void require_file(const std::string& p, const std::string& hint) {
  if (!fs::exists(p)) throw IoError("missing artifact '" + p + "' (run `koopest " + hint + "` first)");
}

std::string index_name(const std::string& prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return prefix + buf + ".csv";
}

struct LoadedData {
  std::vector<Trajectory> train;
  std::vector<Trajectory> test_measured;
  std::vector<Trajectory> test_truth;
};

LoadedData load_data(const std::string& out) {
  const std::string manifest_path = path(out, "data/manifest.json");
  require_file(manifest_path, "generate");
  const json m = json::parse(read_text(manifest_path));
  LoadedData d;
  auto load = [&](const json& list, std::vector<Trajectory>& dst) {
    for (const auto& f : list) dst.push_back(trajectory_from_csv(read_text(path(out, "data/" + f.get<std::string>()))));
  };
  load(m.at("train"), d.train);
  load(m.at("test_measured"), d.test_measured);
  load(m.at("test_truth"), d.test_truth);
  if (d.train.empty()) throw InvalidArgument("dataset has no training trajectories");
  return d;
}

KoopmanModel load_model(const std::string& out) {
  require_file(path(out, "model.json"), "fit-edmd");
  return model_from_json(read_text(path(out, "model.json")));
}

Policy load_policy(const std::string& out) {
  require_file(path(out, "agent.json"), "train");
  return policy_from_json(read_text(path(out, "agent.json")));
}

}  // namespace

ExperimentConfig resolve_config(const Options& opt) {
  if (opt.config_path.empty()) throw InvalidArgument("--config is required");
  ExperimentConfig cfg = load_config(opt.config_path);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.train.seed = *opt.seed;
  }
  return cfg;
}

void cmd_generate(const ExperimentConfig& cfg, const std::string& out) {
  ensure_dir(path(out, "data"));
  const ExperimentData data = generate_data(cfg, cfg.seed);
  json train = json::array();
  json test_m = json::array();
  json test_t = json::array();
  for (std::size_t i = 0; i < data.train_measured.size(); ++i) {
    const std::string name = index_name("train_", i);
    write_text(path(out, "data/" + name), trajectory_to_csv(data.train_measured[i]));
    train.push_back(name);
  }
  for (std::size_t i = 0; i < data.test_measured.size(); ++i) {
    const std::string meas = index_name("test_measured_", i);
    const std::string truth = index_name("test_truth_", i);
    write_text(path(out, "data/" + meas), trajectory_to_csv(data.test_measured[i]));
    write_text(path(out, "data/" + truth), trajectory_to_csv(data.test_clean[i]));
    test_m.push_back(meas);
    test_t.push_back(truth);
  }
  const std::size_t pairs = build_snapshot_dataset(data.train_measured).size();
  const json cfg_json = json::parse(config_to_json(cfg));
  json manifest = {{"dt", cfg.dt},
                   {"noise", cfg_json.at("noise")},
                   {"seed", cfg.seed},
                   {"snapshot_pairs", pairs},
                   {"train", train},
                   {"test_measured", test_m},
                   {"test_truth", test_t},
                   {"provenance", provenance_json(provenance(cfg, "generate"))}};
  write_text(path(out, "data/manifest.json"), manifest.dump(2));
  save_config(cfg, path(out, "config.json"));
}

void cmd_fit_edmd(const ExperimentConfig& cfg, const std::string& out) {
  const LoadedData d = load_data(out);
  const KoopmanModel model = fit_model(cfg, d.train);
  write_text(path(out, "model.json"), model_to_json(model, provenance(cfg, "fit-edmd")));
  std::string csv = "index,sigma\n";
  for (Eigen::Index i = 0; i < model.sigma.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(i), model.sigma(i));
    csv += buf;
  }
  write_text(path(out, "singular_values.csv"), csv);
  json eig = json::array();
  for (const auto& e : koopman_eigenvalues(model)) eig.push_back({e.real(), e.imag()});
  write_text(path(out, "eigenvalues.json"),
             json{{"rank", model.rank()}, {"eigenvalues", eig}, {"provenance", provenance_json(provenance(cfg, "fit-edmd"))}}
                 .dump(2));
}

void cmd_train(const ExperimentConfig& cfg, const std::string& out) {
  const LoadedData d = load_data(out);
  const KoopmanModel model = load_model(out);
  Agent agent = make_hybrid_agent(cfg, model, cfg.seed);
  const HybridEstimator base(model);
  HybridEnv env(base);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainResult history = train(agent, env, d.train, tc);
  const Provenance prov = provenance(cfg, "train");
  write_text(path(out, "agent.json"), policy_to_json(agent.policy(), prov));
  write_text(path(out, "training_log.csv"), train_log_to_csv(history.log));
  write_text(path(out, "episode_rewards.csv"), episode_rewards_to_csv(history.episode_rewards));
  write_text(path(out, "train_summary.json"),
             json{{"episodes", tc.episodes},
                  {"optimizer_steps", history.optimizer_steps},
                  {"target_updates", history.target_updates},
                  {"divergence_resets", history.divergence_resets},
                  {"wall_seconds", history.seconds},
                  {"provenance", provenance_json(prov)}}
                 .dump(2));
}

void cmd_evaluate(const ExperimentConfig& cfg, const std::string& out, const std::vector<std::string>& methods) {
  const LoadedData d = load_data(out);
  if (d.test_measured.empty()) throw InvalidArgument("config has no test trajectories");
  const KoopmanModel model = load_model(out);
  ensure_dir(path(out, "rollouts"));
  std::vector<std::pair<std::string, EvalReport>> reports;
  auto emit = [&](const std::string& name, const Predictor& pred) {
    std::vector<Trajectory> est;
    EvalReport r = evaluate_predictor(pred, d.test_measured, d.test_truth, &est);
    for (std::size_t i = 0; i < est.size(); ++i) {
      write_text(path(out, "rollouts/" + index_name(name + "_", i)), rollout_to_csv(d.test_truth[i], est[i]));
    }
    reports.emplace_back(name, std::move(r));
  };
  for (const auto& m : methods) {
    if (m == "hybrid") {
      const HybridEstimator est(model, load_policy(out));
      emit("hybrid", hybrid_predictor(est));
    } else if (m == "edmd") {
      const HybridEstimator est(model);
      emit("edmd", hybrid_predictor(est));
    } else if (m == "rl") {
      const RlOnlyResult rl = run_rl_only(cfg, d.train, cfg.seed);
      emit("rl", rl_only_predictor(rl.policy));
      write_text(path(out, "rl_only_agent.json"), policy_to_json(rl.policy, provenance(cfg, "evaluate")));
    } else {
      throw InvalidArgument("unknown evaluation method '" + m + "' (expected hybrid, edmd or rl)");
    }
  }
  write_text(path(out, "report.json"), eval_report_to_json(reports, provenance(cfg, "evaluate")));
}

void cmd_transfer(const ExperimentConfig& cfg, const std::string& out) {
  const LoadedData d = load_data(out);
  const KoopmanModel model = load_model(out);
  const HybridEstimator source(model, load_policy(out));

  TransferRun tr = build_transfer(cfg, source, d.train, cfg.seed);
  const std::vector<Trajectory> x_train_measured = d.train;

  // z-domain test set
  Diffeomorphism& h = tr.h;
  auto push = [&](const std::vector<Trajectory>& src) {
    std::vector<Trajectory> dst;
    for (const auto& t : src) {
      Trajectory z;
      z.dt = t.dt;
      for (const auto& x : t.states) z.states.push_back(h.apply(x));
      dst.push_back(std::move(z));
    }
    return dst;
  };
  const auto z_test_measured = push(d.test_measured);
  const auto z_test_truth = push(d.test_truth);

  const TransferredEstimator& te = *tr.fitted;
  const EvalReport fitted = evaluate_predictor(
      [&te](const Vector& zh, const Vector& zm) { return te.predict(zh, zm); }, z_test_measured, z_test_truth);
  const EvalReport exact = evaluate_predictor(
      [&](const Vector& zh, const Vector& zm) { return exact_transfer_predict(source, h, zh, zm); },
      z_test_measured, z_test_truth);

  // Lipschitz error bound for the exact pullback
  std::vector<Trajectory> pulled_meas;
  std::vector<Trajectory> pulled_truth;
  for (std::size_t i = 0; i < z_test_measured.size(); ++i) {
    Trajectory a;
    Trajectory b;
    a.dt = b.dt = z_test_measured[i].dt;
    for (const auto& z : z_test_measured[i].states) a.states.push_back(h.apply_inverse(z));
    for (const auto& z : z_test_truth[i].states) b.states.push_back(h.apply_inverse(z));
    pulled_meas.push_back(std::move(a));
    pulled_truth.push_back(std::move(b));
  }
  const double eps = std::max(residual_gap(source, x_train_measured, x_train_measured),
                              residual_gap(source, pulled_meas, pulled_truth));
  const BoundReport bound =
      check_error_bound(h.lipschitz(), eps, exact_transfer_errors(source, h, z_test_measured, z_test_truth));

  const Provenance prov = provenance(cfg, "transfer");
  write_text(path(out, "transfer_bundle.json"), transfer_bundle_to_json(TransferBundle{h, tr.O1, tr.O2, eps}, prov));
  double train_seconds = -1.0;
  if (fs::exists(path(out, "train_summary.json"))) {
    train_seconds = json::parse(read_text(path(out, "train_summary.json"))).value("wall_seconds", -1.0);
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json violations = json::array();
  for (const auto& v : bound.violations) {
    violations.push_back({{"trajectory", v.trajectory}, {"step", v.step}, {"squared_error", v.squared_error}});
  }
  write_text(path(out, "transfer_report.json"),
             json{{"fitted_maps_mse", num(fitted.aggregate)},
                  {"exact_pullback_mse", num(exact.aggregate)},
                  {"O1_relative_residual", tr.O1.relative_residual},
                  {"O2_relative_residual", tr.O2.relative_residual},
                  {"O1_rank_deficient", tr.O1.rank_deficient},
                  {"O2_rank_deficient", tr.O2.rank_deficient},
                  {"construction_seconds", tr.seconds},
                  {"train_seconds", train_seconds},
                  {"bound",
                   {{"K", bound.K},
                    {"eps", bound.eps},
                    {"bound", bound.bound},
                    {"max_error", bound.max_error},
                    {"margin", bound.margin},
                    {"holds", bound.holds},
                    {"violations", violations}}},
                  {"provenance", provenance_json(prov)}}
                 .dump(2));
  if (tr.O1.rank_deficient || tr.O2.rank_deficient) {
    std::cerr << json{{"warning", "rank_deficiency"},
                      {"O1_rank", tr.O1.rank},
                      {"O2_rank", tr.O2.rank},
                      {"O1_relative_residual", tr.O1.relative_residual},
                      {"O2_relative_residual", tr.O2.relative_residual}}
                     .dump()
              << "\n";
  }
}

void cmd_finetune(const ExperimentConfig& cfg, const std::string& out) {
  require_file(path(out, "transfer_bundle.json"), "transfer");
  const TransferBundle bundle = transfer_bundle_from_json(read_text(path(out, "transfer_bundle.json")));
  const KoopmanModel model = load_model(out);
  const Policy source_policy = load_policy(out);
  const HybridEstimator source(model, source_policy);
  const HybridEstimator base(model);

  const ExperimentData x_data = generate_data(cfg, cfg.seed);
  const ExperimentData z_data = map_data(x_data, bundle.h, cfg, cfg.seed);

  TrainConfig tc = cfg.train;
  tc.episodes = cfg.transfer.finetune_episodes;
  tc.seed = derive_seed(cfg.seed, 30);
  const StateEncoding enc = cfg.estimator.encoding(model.state_dim());

  const TransferredEstimator te(model, source_policy, bundle.O1.O, bundle.O2.O);
  const PullbackEnv pullback(base, bundle.h);
  const TransferredEnv fitted(te);
  const EstimatorEnv& env = cfg.transfer.finetune_env == "fitted" ? static_cast<const EstimatorEnv&>(fitted)
                                                                  : static_cast<const EstimatorEnv&>(pullback);
  const FinetuneResult warm =
      warm_start_finetune(source_policy, env, z_data.train_measured, tc, cfg.estimator.action_scale, enc);
  const FinetuneResult cold =
      warm_start_finetune(std::nullopt, env, z_data.train_measured, tc, cfg.estimator.action_scale, enc);

  const Provenance prov = provenance(cfg, "finetune");
  write_text(path(out, "finetune.csv"), finetune_to_csv(warm.history.episode_rewards, cold.history.episode_rewards));
  write_text(path(out, "finetuned_agent.json"), policy_to_json(warm.agent.policy(), prov));
  write_text(path(out, "finetune_summary.json"),
             json{{"env", cfg.transfer.finetune_env},
                  {"episodes", tc.episodes},
                  {"transferred", warm.history.episode_rewards},
                  {"random", cold.history.episode_rewards},
                  {"provenance", provenance_json(prov)}}
                 .dump(2));
}

int run(const std::string& command, const Options& opt) {
  try {
    const ExperimentConfig cfg = resolve_config(opt);
    ensure_dir(opt.out_dir);
    if (command == "generate") {
      cmd_generate(cfg, opt.out_dir);
    } else if (command == "fit-edmd") {
      cmd_fit_edmd(cfg, opt.out_dir);
    } else if (command == "train") {
      cmd_train(cfg, opt.out_dir);
    } else if (command == "evaluate") {
      cmd_evaluate(cfg, opt.out_dir, opt.methods);
    } else if (command == "transfer") {
      cmd_transfer(cfg, opt.out_dir);
    } else if (command == "finetune") {
      cmd_finetune(cfg, opt.out_dir);
    } else {
      throw InvalidArgument("unknown command '" + command + "'");
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}, {"command", command}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}, {"command", command}}.dump() << "\n";
    return 1;
  }
}

}  // namespace koopest::cli
