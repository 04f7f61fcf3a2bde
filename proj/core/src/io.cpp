#include "koopest/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace koopest {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Matrix m(rows, cols);
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw IoError("matrix row count mismatch");
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw IoError("matrix column count mismatch");
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = row.at(static_cast<std::size_t>(j2)).get<double>();
  }
  return m;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json provenance_json(const Provenance& p) {
  return {{"command", p.command}, {"config_hash", p.config_hash}, {"seed", p.seed}, {"version", p.version}};
}

json dictionary_value(const PolynomialDictionary& d) {
  return {{"n", d.state_dim()}, {"scale", d.scale()}, {"terms", d.terms()}};
}

PolynomialDictionary dictionary_value_from(const json& j) {
  return PolynomialDictionary(j.at("n").get<std::size_t>(), j.at("terms").get<std::vector<MultiIndex>>(),
                              j.value("scale", 1.0));
}

json network_value(const Mlp& net) {
  json layers = json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    layers.push_back({{"weight", matrix_json(net.weight(l))}, {"bias", vector_json(net.bias(l))}});
  }
  return {{"layer_dims", net.layer_dims()},
          {"hidden_activation", "relu"},
          {"output_activation", net.output_activation() == OutputActivation::ScaledTanh ? "scaled_tanh" : "linear"},
          {"output_scale", net.output_scale()},
          {"layers", layers}};
}

Mlp network_value_from(const json& j) {
  const std::string act = j.at("output_activation").get<std::string>();
  OutputActivation out;
  if (act == "scaled_tanh") {
    out = OutputActivation::ScaledTanh;
  } else if (act == "linear") {
    out = OutputActivation::Linear;
  } else {
    throw IoError("unknown output activation '" + act + "'");
  }
  Mlp net(j.at("layer_dims").get<std::vector<int>>(), out, j.value("output_scale", 1.0));
  const json& layers = j.at("layers");
  if (layers.size() != net.num_layers()) throw IoError("network layer count mismatch");
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Matrix w = matrix_from(layers[l].at("weight"));
    Vector b = vector_from(layers[l].at("bias"));
    if (w.rows() != net.weight(l).rows() || w.cols() != net.weight(l).cols() || b.size() != net.bias(l).size()) {
      throw IoError("network parameter shape mismatch in layer " + std::to_string(l));
    }
    net.weight(l) = std::move(w);
    net.bias(l) = std::move(b);
  }
  return net;
}

json map_fit_json(const MapFit& f) {
  return {{"O", matrix_json(f.O)},
          {"residual", f.residual},
          {"relative_residual", f.relative_residual},
          {"rank", f.rank},
          {"rank_deficient", f.rank_deficient}};
}

MapFit map_fit_from(const json& j) {
  MapFit f;
  f.O = matrix_from(j.at("O"));
  f.residual = j.value("residual", 0.0);
  f.relative_residual = j.value("relative_residual", 0.0);
  f.rank = j.value("rank", Eigen::Index{0});
  f.rank_deficient = j.value("rank_deficient", false);
  return f;
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string dictionary_to_json(const PolynomialDictionary& dict) { return dictionary_value(dict).dump(); }

PolynomialDictionary dictionary_from_json(const std::string& text) {
  const json j = parse(text, "dictionary");
  return guarded("dictionary", [&] { return dictionary_value_from(j); });
}

std::string model_to_json(const KoopmanModel& model, const Provenance& prov) {
  json j = {{"dictionary", dictionary_value(model.dict)},
            {"rank", model.rank()},
            {"U", matrix_json(model.U)},
            {"sigma", vector_json(model.sigma)},
            {"A_r", matrix_json(model.A_r)},
            {"provenance", provenance_json(prov)}};
  return j.dump();
}

KoopmanModel model_from_json(const std::string& text) {
  const json j = parse(text, "model");
  return guarded("model", [&] {
    KoopmanModel m;
    m.dict = dictionary_value_from(j.at("dictionary"));
    m.U = matrix_from(j.at("U"));
    m.sigma = vector_from(j.at("sigma"));
    m.A_r = matrix_from(j.at("A_r"));
    const auto r = j.at("rank").get<Eigen::Index>();
    if (m.A_r.rows() != r || m.A_r.cols() != r || m.U.cols() != r || m.sigma.size() != r ||
        m.U.rows() != static_cast<Eigen::Index>(m.dict.size())) {
      throw IoError("model matrices are inconsistent with rank " + std::to_string(r));
    }
    return m;
  });
}

std::string network_to_json(const Mlp& net) { return network_value(net).dump(); }

Mlp network_from_json(const std::string& text) {
  const json j = parse(text, "network");
  return guarded("network", [&] { return network_value_from(j); });
}

std::string policy_to_json(const Policy& policy, const Provenance& prov) {
  json j = {{"actor", network_value(policy.actor)},
            {"encoding",
             {{"state_scale", vector_json(policy.encoding.state_scale)},
              {"error_scale", vector_json(policy.encoding.error_scale)}}},
            {"provenance", provenance_json(prov)}};
  return j.dump();
}

Policy policy_from_json(const std::string& text) {
  const json j = parse(text, "policy");
  return guarded("policy", [&] {
    Policy p{network_value_from(j.at("actor")),
             StateEncoding{vector_from(j.at("encoding").at("state_scale")),
                           vector_from(j.at("encoding").at("error_scale"))}};
    if (p.encoding.error_scale.size() != p.encoding.state_scale.size() ||
        static_cast<Eigen::Index>(2 * p.encoding.state_dim()) != p.actor.input_dim()) {
      throw IoError("policy encoding does not match the actor input");
    }
    return p;
  });
}

std::string transfer_bundle_to_json(const TransferBundle& b, const Provenance& prov) {
  json j = {{"diffeomorphism",
             {{"tag", b.h.tag()},
              {"cubic", vector_json(b.h.cubic())},
              {"linear", vector_json(b.h.linear())},
              {"domain_radius", b.h.domain_radius()},
              {"K", b.h.lipschitz()}}},
            {"O1", map_fit_json(b.O1)},
            {"O2", map_fit_json(b.O2)},
            {"eps", b.eps},
            {"provenance", provenance_json(prov)}};
  return j.dump();
}

TransferBundle transfer_bundle_from_json(const std::string& text) {
  const json j = parse(text, "transfer bundle");
  return guarded("transfer bundle", [&] {
    const json& d = j.at("diffeomorphism");
    TransferBundle b{Diffeomorphism(vector_from(d.at("cubic")), vector_from(d.at("linear")),
                                    d.at("domain_radius").get<double>()),
                     map_fit_from(j.at("O1")), map_fit_from(j.at("O2")), j.value("eps", 0.0)};
    b.h.set_lipschitz(d.value("K", 1.0));
    return b;
  });
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t";
  for (std::size_t i = 0; i < traj.dimension(); ++i) out += ",x" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out += fmt(static_cast<double>(k) * traj.dt);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) out += "," + fmt(traj.states[k](i));
    out += "\n";
  }
  return out;
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t", 0) != 0) throw IoError("trajectory CSV lacks a header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in trajectory CSV");
      }
    }
    if (row.size() < 2) throw IoError("trajectory CSV row has no state entries");
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("ragged trajectory CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("trajectory CSV has no rows");
  Trajectory traj;
  traj.dt = rows.size() > 1 ? rows[1][0] - rows[0][0] : 0.0;
  for (const auto& row : rows) {
    traj.states.push_back(Eigen::Map<const Vector>(row.data() + 1, static_cast<Eigen::Index>(row.size() - 1)));
  }
  return traj;
}

std::string rollout_to_csv(const Trajectory& truth, const Trajectory& est) {
  if (truth.states.size() != est.states.size()) throw DimensionMismatch("rollout CSV: length mismatch");
  const std::size_t n = truth.dimension();
  std::string out = "t";
  for (std::size_t i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1) + "_true";
  for (std::size_t i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1) + "_hat";
  out += "\n";
  for (std::size_t k = 0; k < truth.states.size(); ++k) {
    out += fmt(static_cast<double>(k) * truth.dt);
    for (Eigen::Index i = 0; i < truth.states[k].size(); ++i) out += "," + fmt(truth.states[k](i));
    for (Eigen::Index i = 0; i < est.states[k].size(); ++i) out += "," + fmt(est.states[k](i));
    out += "\n";
  }
  return out;
}

std::string train_log_to_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "episode,step,reward,critic_loss,actor_grad_norm\n";
  for (const auto& r : log) {
    out += std::to_string(r.episode) + "," + std::to_string(r.step) + "," + fmt(r.reward) + "," +
           fmt(r.critic_loss) + "," + fmt(r.actor_grad_norm) + "\n";
  }
  return out;
}

std::string episode_rewards_to_csv(const std::vector<double>& rewards) {
  std::string out = "episode,reward\n";
  for (std::size_t i = 0; i < rewards.size(); ++i) out += std::to_string(i) + "," + fmt(rewards[i]) + "\n";
  return out;
}

std::string finetune_to_csv(const std::vector<double>& transferred, const std::vector<double>& random) {
  if (transferred.size() != random.size()) throw DimensionMismatch("finetune CSV: episode count mismatch");
  std::string out = "init";
  for (std::size_t i = 0; i < transferred.size(); ++i) out += ",episode" + std::to_string(i + 1);
  out += "\ntransferred";
  for (double v : transferred) out += "," + fmt(v);
  out += "\nrandom";
  for (double v : random) out += "," + fmt(v);
  out += "\n";
  return out;
}

std::string eval_report_to_json(const std::vector<std::pair<std::string, EvalReport>>& reports,
                                const Provenance& prov) {
  json methods = json::object();
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const auto& [name, r] : reports) {
    json per = json::array();
    for (double v : r.per_trajectory) per.push_back(num(v));
    methods[name] = {{"per_trajectory_mse", per},
                     {"aggregate_mse", num(r.aggregate)},
                     {"wall_seconds", r.seconds},
                     {"convention", r.convention}};
  }
  return json{{"methods", methods}, {"provenance", provenance_json(prov)}}.dump(2);
}

}  // namespace koopest
