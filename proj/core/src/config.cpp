#include "koopest/config.hpp"

#include "koopest/io.hpp"

#include <json.hpp>

#include <cstdio>

namespace koopest {

using nlohmann::json;

DynamicalSystem SystemSpec::build() const {
  if (kind == "toy") return DynamicalSystem::toy();
  if (kind == "van_der_pol") return DynamicalSystem::van_der_pol(alpha);
  if (kind == "custom") return DynamicalSystem(custom);
  throw InvalidArgument("unknown system kind '" + kind + "'");
}

PolynomialDictionary DictionarySpec::build(std::size_t n) const {
  if (!terms.empty()) return PolynomialDictionary(n, terms, scale);
  return build_dictionary(n, max_degree, include_constant, scale);
}

Diffeomorphism TransferSpec::build(std::size_t n) const {
  if (kind == "identity") return Diffeomorphism::identity(n, domain_radius);
  if (kind != "cubic") throw InvalidArgument("unknown diffeomorphism kind '" + kind + "'");
  require(cubic.size() == n && linear.size() == n, "diffeomorphism coefficients must have length n");
  return Diffeomorphism(Eigen::Map<const Vector>(cubic.data(), static_cast<Eigen::Index>(n)),
                        Eigen::Map<const Vector>(linear.data(), static_cast<Eigen::Index>(n)), domain_radius);
}

namespace {

json noise_spec_json(const NoiseSpec& n) {
  if (std::holds_alternative<NoNoise>(n.kind)) return {{"kind", "none"}};
  if (const auto* g = std::get_if<GaussianSigma>(&n.kind)) return {{"kind", "gaussian"}, {"sigma", g->sigma}};
  return {{"kind", "snr_db"}, {"snr", std::get<SnrDb>(n.kind).snr}};
}

NoiseSpec noise_spec_from(const json& j) {
  NoiseSpec n;
  const std::string kind = j.value("kind", "none");
  if (kind == "none") {
    n.kind = NoNoise{};
  } else if (kind == "gaussian") {
    n.kind = GaussianSigma{j.at("sigma").get<double>()};
  } else if (kind == "snr_db") {
    n.kind = SnrDb{j.at("snr").get<double>()};
  } else {
    throw InvalidArgument("unknown noise kind '" + kind + "'");
  }
  return n;
}

json train_json(const TrainConfig& t) {
  json noise;
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&t.noise.kind)) {
    noise = {{"kind", "ou"}, {"theta", ou->theta}, {"sigma", ou->sigma}};
  } else {
    noise = {{"kind", "gaussian"}, {"sigma", std::get<GaussianNoise>(t.noise.kind).sigma}};
  }
  noise["decay"] = t.noise.decay;
  return {{"gamma", t.gamma},
          {"batch_size", t.batch_size},
          {"target_period", t.target_period},
          {"episodes", t.episodes},
          {"max_steps", t.max_steps},
          {"buffer_capacity", t.buffer_capacity},
          {"noise", noise},
          {"actor_lr", t.actor_lr},
          {"critic_lr", t.critic_lr},
          {"hidden", t.hidden},
          {"final_layer_range", t.final_layer_range},
          {"reward_scale", t.reward_scale},
          {"divergence_threshold", t.divergence_threshold}};
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.gamma = j.value("gamma", t.gamma);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.target_period = j.value("target_period", t.target_period);
  t.episodes = j.value("episodes", t.episodes);
  t.max_steps = j.value("max_steps", t.max_steps);
  t.buffer_capacity = j.value("buffer_capacity", t.buffer_capacity);
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    const std::string kind = n.value("kind", "ou");
    if (kind == "ou") {
      OrnsteinUhlenbeck ou;
      t.noise.kind = OrnsteinUhlenbeck{n.value("theta", ou.theta), n.value("sigma", ou.sigma)};
    } else if (kind == "gaussian") {
      t.noise.kind = GaussianNoise{n.value("sigma", GaussianNoise{}.sigma)};
    } else {
      throw InvalidArgument("unknown exploration noise kind '" + kind + "'");
    }
    t.noise.decay = n.value("decay", t.noise.decay);
  }
  t.actor_lr = j.value("actor_lr", t.actor_lr);
  t.critic_lr = j.value("critic_lr", t.critic_lr);
  t.hidden = j.value("hidden", t.hidden);
  t.final_layer_range = j.value("final_layer_range", t.final_layer_range);
  t.reward_scale = j.value("reward_scale", t.reward_scale);
  t.divergence_threshold = j.value("divergence_threshold", t.divergence_threshold);
  return t;
}

json to_json_value(const ExperimentConfig& c) {
  json system = {{"kind", c.system.kind}, {"alpha", c.system.alpha}};
  if (c.system.kind == "custom") {
    json terms = json::array();
    for (const auto& t : c.system.custom.terms) {
      terms.push_back({{"component", t.component}, {"coefficient", t.coefficient}, {"exponents", t.exponents}});
    }
    system["dimension"] = c.system.custom.dimension;
    system["terms"] = terms;
  }
  json rank;
  if (const auto* f = std::get_if<FixedRank>(&c.rank)) {
    rank = {{"policy", "fixed"}, {"r", f->r}};
  } else {
    rank = {{"policy", "energy"}, {"tau", std::get<EnergyThreshold>(c.rank).tau}};
  }
  return {{"schema_version", c.schema_version},
          {"name", c.name},
          {"seed", c.seed},
          {"system", system},
          {"dt", c.dt},
          {"trajectories", c.trajectories},
          {"steps", c.steps},
          {"init_radius", c.init_radius},
          {"noise", noise_spec_json(c.noise)},
          {"test", {{"trajectories", c.test_trajectories}, {"steps", c.test_steps}}},
          {"dictionary",
           {{"max_degree", c.dictionary.max_degree},
            {"include_constant", c.dictionary.include_constant},
            {"scale", c.dictionary.scale},
            {"terms", c.dictionary.terms}}},
          {"rank", rank},
          {"train", train_json(c.train)},
          {"estimator",
           {{"action_scale", c.estimator.action_scale},
            {"rl_only_action_scale", c.estimator.rl_only_action_scale},
            {"state_scale", c.estimator.state_scale},
            {"error_scale", c.estimator.error_scale}}},
          {"transfer",
           {{"kind", c.transfer.kind},
            {"cubic", c.transfer.cubic},
            {"linear", c.transfer.linear},
            {"domain_radius", c.transfer.domain_radius},
            {"lipschitz_pairs", c.transfer.lipschitz_pairs},
            {"lipschitz_safety", c.transfer.lipschitz_safety},
            {"finetune_episodes", c.transfer.finetune_episodes},
            {"finetune_env", c.transfer.finetune_env}}}};
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return to_json_value(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentConfig c;
    c.schema_version = j.value("schema_version", kConfigSchemaVersion);
    if (c.schema_version != kConfigSchemaVersion) {
      throw InvalidArgument("unsupported config schema_version " + std::to_string(c.schema_version));
    }
    c.name = j.value("name", c.name);
    c.seed = j.value("seed", c.seed);
    if (j.contains("system")) {
      const json& s = j.at("system");
      c.system.kind = s.value("kind", c.system.kind);
      c.system.alpha = s.value("alpha", c.system.alpha);
      if (c.system.kind == "custom") {
        c.system.custom.dimension = s.at("dimension").get<std::size_t>();
        for (const auto& t : s.at("terms")) {
          c.system.custom.terms.push_back({t.at("component").get<std::size_t>(), t.at("coefficient").get<double>(),
                                           t.at("exponents").get<std::vector<int>>()});
        }
      }
    }
    c.dt = j.value("dt", c.dt);
    c.trajectories = j.value("trajectories", c.trajectories);
    c.steps = j.value("steps", c.steps);
    c.init_radius = j.value("init_radius", c.init_radius);
    if (j.contains("noise")) c.noise = noise_spec_from(j.at("noise"));
    if (j.contains("test")) {
      c.test_trajectories = j.at("test").value("trajectories", c.test_trajectories);
      c.test_steps = j.at("test").value("steps", c.test_steps);
    }
    if (j.contains("dictionary")) {
      const json& d = j.at("dictionary");
      c.dictionary.max_degree = d.value("max_degree", c.dictionary.max_degree);
      c.dictionary.include_constant = d.value("include_constant", c.dictionary.include_constant);
      c.dictionary.scale = d.value("scale", c.dictionary.scale);
      c.dictionary.terms = d.value("terms", c.dictionary.terms);
    }
    if (j.contains("rank")) {
      const json& r = j.at("rank");
      const std::string policy = r.value("policy", "energy");
      if (policy == "fixed") {
        c.rank = FixedRank{r.at("r").get<std::size_t>()};
      } else if (policy == "energy") {
        c.rank = EnergyThreshold{r.value("tau", EnergyThreshold{}.tau)};
      } else {
        throw InvalidArgument("unknown rank policy '" + policy + "'");
      }
    }
    if (j.contains("train")) c.train = train_from(j.at("train"));
    if (j.contains("estimator")) {
      const json& e = j.at("estimator");
      c.estimator.action_scale = e.value("action_scale", c.estimator.action_scale);
      c.estimator.rl_only_action_scale = e.value("rl_only_action_scale", c.estimator.rl_only_action_scale);
      c.estimator.state_scale = e.value("state_scale", c.estimator.state_scale);
      c.estimator.error_scale = e.value("error_scale", c.estimator.error_scale);
    }
    if (j.contains("transfer")) {
      const json& t = j.at("transfer");
      c.transfer.kind = t.value("kind", c.transfer.kind);
      c.transfer.cubic = t.value("cubic", c.transfer.cubic);
      c.transfer.linear = t.value("linear", c.transfer.linear);
      c.transfer.domain_radius = t.value("domain_radius", c.transfer.domain_radius);
      c.transfer.lipschitz_pairs = t.value("lipschitz_pairs", c.transfer.lipschitz_pairs);
      c.transfer.lipschitz_safety = t.value("lipschitz_safety", c.transfer.lipschitz_safety);
      c.transfer.finetune_episodes = t.value("finetune_episodes", c.transfer.finetune_episodes);
      c.transfer.finetune_env = t.value("finetune_env", c.transfer.finetune_env);
      if (c.transfer.finetune_env != "pullback" && c.transfer.finetune_env != "fitted") {
        throw InvalidArgument("finetune_env must be 'pullback' or 'fitted'");
      }
    }
    require(c.dt > 0.0, "dt must be positive");
    require(c.trajectories >= 1, "trajectories must be >= 1");
    require(c.steps >= 1, "steps must be >= 1");
    require(c.test_steps >= 1, "test steps must be >= 1");
    require(c.init_radius > 0.0, "init_radius must be positive");
    c.train.seed = c.seed;
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_text(path)); }

void save_config(const ExperimentConfig& cfg, const std::string& path) { write_text(path, config_to_json(cfg)); }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return config_to_json(a) == config_to_json(b); }

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_json_value(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace koopest
