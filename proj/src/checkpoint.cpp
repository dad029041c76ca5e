#include "vqdqn/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "vqdqn/errors.hpp"

namespace vqdqn {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "vqdqn-checkpoint";
constexpr int kVersion = 1;

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + " has unknown key '" + key + "'");
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
  if (!(model == o.model) || seed != o.seed) return false;
  if (optimizer.has_value() != o.optimizer.has_value()) return false;
  if (!optimizer) return true;
  return optimizer->square_avg == o.optimizer->square_avg && optimizer->steps == o.optimizer->steps;
}

json spec_to_json(const vqc::CircuitSpec& spec) {
  return json{{"n_qubits", spec.n_qubits},
              {"n_layers", spec.n_layers},
              {"parameterized_wires", spec.parameterized_wires},
              {"measured_wires", spec.measured_wires},
              {"observable", spec.observable == vqc::Observable::ProbOne ? "prob_one" : "pauli_z"}};
}

vqc::CircuitSpec spec_from_json(const json& j) {
  const std::string where = "circuit";
  only_keys(j, {"n_qubits", "n_layers", "parameterized_wires", "measured_wires", "observable"}, where);
  vqc::CircuitSpec spec;
  spec.n_qubits = field<int>(j, "n_qubits", where);
  spec.n_layers = field<int>(j, "n_layers", where);
  spec.parameterized_wires = field<std::vector<int>>(j, "parameterized_wires", where);
  spec.measured_wires = field<std::vector<int>>(j, "measured_wires", where);
  if (j.contains("observable")) {
    const auto obs = field<std::string>(j, "observable", where);
    if (obs == "prob_one") {
      spec.observable = vqc::Observable::ProbOne;
    } else if (obs == "pauli_z") {
      spec.observable = vqc::Observable::PauliZ;
    } else {
      throw ConfigError("circuit.observable must be 'prob_one' or 'pauli_z'");
    }
  }
  spec.validate();
  return spec;
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j{{"format", kFormat},
         {"version", kVersion},
         {"spec", spec_to_json(ckpt.model.spec)},
         {"param_count", vqc::param_count(ckpt.model.spec)},
         {"thetas", ckpt.model.thetas},
         {"bias", ckpt.model.bias},
         {"seed", ckpt.seed}};
  if (ckpt.optimizer) {
    j["optimizer"] = json{{"square_avg", ckpt.optimizer->square_avg}, {"steps", ckpt.optimizer->steps}};
  }
  return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  const std::string where = "checkpoint";
  only_keys(j, {"format", "version", "spec", "param_count", "thetas", "bias", "seed", "optimizer"},
            where);
  if (field<std::string>(j, "format", where) != kFormat) throw ConfigError("not a vqdqn checkpoint");
  if (field<int>(j, "version", where) != kVersion) throw ConfigError("unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.model.spec = spec_from_json(j.at("spec"));
  ckpt.model.thetas = field<std::vector<double>>(j, "thetas", where);
  ckpt.model.bias = field<std::vector<double>>(j, "bias", where);
  ckpt.seed = field<std::uint64_t>(j, "seed", where);
  if (ckpt.model.thetas.size() != ckpt.model.spec.theta_count() ||
      ckpt.model.bias.size() != ckpt.model.spec.n_actions()) {
    throw ConfigError("checkpoint parameter counts do not match its circuit spec");
  }
  if (j.contains("param_count") &&
      field<std::size_t>(j, "param_count", where) != vqc::param_count(ckpt.model.spec)) {
    throw ConfigError("checkpoint param_count does not match its circuit spec");
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    only_keys(o, {"square_avg", "steps"}, "checkpoint.optimizer");
    rl::RmsPropState st;
    st.square_avg = field<std::vector<double>>(o, "square_avg", "checkpoint.optimizer");
    st.steps = field<std::size_t>(o, "steps", "checkpoint.optimizer");
    if (!st.square_avg.empty() && st.square_avg.size() != vqc::param_count(ckpt.model.spec)) {
      throw ConfigError("checkpoint optimizer state does not match the parameter count");
    }
    ckpt.optimizer = st;
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << checkpoint_to_json(ckpt);
  if (!out) throw ConfigError("failed writing " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open checkpoint " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return checkpoint_from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

}  // namespace vqdqn
