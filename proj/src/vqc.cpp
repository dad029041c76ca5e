#include "vqdqn/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "vqdqn/errors.hpp"

namespace vqdqn::vqc {
namespace {

using qsim::Gate;
using qsim::StateVector;

constexpr double kShift = std::numbers::pi / 2;

double observe(Observable obs, double p_one) {
  return obs == Observable::ProbOne ? p_one : 1.0 - 2.0 * p_one;
}

bool has_gate_noise(const qsim::NoiseModel& noise) {
  for (const auto& [kind, probs] : noise.single_qubit) {
    for (double p : probs) {
      if (p > 0.0) return true;
    }
  }
  for (const auto& [wires, p] : noise.two_qubit) {
    if (p > 0.0) return true;
  }
  return false;
}

std::vector<double> select_measured(const CircuitSpec& spec, const std::vector<double>& p_one) {
  std::vector<double> out;
  out.reserve(spec.measured_wires.size());
  for (int w : spec.measured_wires) out.push_back(observe(spec.observable, p_one[w]));
  return out;
}

std::vector<double> measure_shots(const CircuitSpec& spec, const std::vector<Gate>& gates,
                                  const backend::Shots& cfg) {
  if (cfg.shots < 1) throw ArgumentError("shot count must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint64_t> counts(spec.n_qubits, 0);
  const qsim::NoiseModel* noise = cfg.noise ? &*cfg.noise : nullptr;
  if (noise == nullptr || !has_gate_noise(*noise)) {
    const auto sv = qsim::run_circuit(StateVector::zero(spec.n_qubits), gates);
    qsim::accumulate_shots(sv, cfg.shots, rng, noise, counts);
  } else {
    const int trajectories =
        cfg.trajectories <= 0 ? cfg.shots : std::min(cfg.trajectories, cfg.shots);
    const int base = cfg.shots / trajectories;
    const int extra = cfg.shots % trajectories;
    for (int t = 0; t < trajectories; ++t) {
      const auto sv = qsim::run_noisy_circuit(StateVector::zero(spec.n_qubits), gates, *noise, rng);
      qsim::accumulate_shots(sv, base + (t < extra ? 1 : 0), rng, noise, counts);
    }
  }
  std::vector<double> freq(counts.size());
  for (std::size_t q = 0; q < counts.size(); ++q) {
    freq[q] = static_cast<double>(counts[q]) / cfg.shots;
  }
  return select_measured(spec, freq);
}

std::vector<double> measure_trajectories(const CircuitSpec& spec, const std::vector<Gate>& gates,
                                         const backend::TrajectoryAverage& cfg) {
  if (cfg.trajectories < 1) throw ArgumentError("trajectory count must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> p(spec.n_qubits, 0.0);
  const int runs = has_gate_noise(cfg.noise) ? cfg.trajectories : 1;
  for (int t = 0; t < runs; ++t) {
    const auto sv = qsim::run_noisy_circuit(StateVector::zero(spec.n_qubits), gates, cfg.noise, rng);
    const auto pt = qsim::prob_one_all(sv);
    for (int q = 0; q < spec.n_qubits; ++q) p[q] += pt[q];
  }
  for (int q = 0; q < spec.n_qubits; ++q) {
    const double clean = p[q] / runs;
    const double f = cfg.noise.readout(q);
    p[q] = clean * (1.0 - f) + (1.0 - clean) * f;
  }
  return select_measured(spec, p);
}

}  // namespace

CircuitSpec CircuitSpec::uniform(int n_qubits, int n_layers) {
  CircuitSpec spec;
  spec.n_qubits = n_qubits;
  spec.n_layers = n_layers;
  for (int w = 0; w < n_qubits; ++w) {
    spec.parameterized_wires.push_back(w);
    spec.measured_wires.push_back(w);
  }
  return spec;
}

CircuitSpec CircuitSpec::radio(int n_channels, int n_layers) {
  if (n_channels < 2 || n_channels > 5) {
    throw ConfigError("radio circuits support 2 to 5 channels, got " + std::to_string(n_channels));
  }
  // smallest register holding n^2 basis states, never fewer wires than channels
  int n_qubits = n_channels;
  while ((1 << n_qubits) < n_channels * n_channels) ++n_qubits;
  CircuitSpec spec;
  spec.n_qubits = n_qubits;
  spec.n_layers = n_layers;
  for (int w = 0; w < n_channels; ++w) {
    spec.parameterized_wires.push_back(w);
    spec.measured_wires.push_back(w);
  }
  return spec;
}

CircuitSpec CircuitSpec::frozen_lake(int n_layers) { return uniform(4, n_layers); }

void CircuitSpec::validate() const {
  if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) {
    throw ConfigError("circuit n_qubits " + std::to_string(n_qubits) + " outside [1, 10]");
  }
  if (n_layers < 0) throw ConfigError("circuit n_layers must be non-negative");
  if (measured_wires.empty()) throw ConfigError("circuit measures no wires");
  auto check = [&](const std::vector<int>& wires, const char* what) {
    std::set<int> seen;
    for (int w : wires) {
      if (w < 0 || w >= n_qubits) {
        throw ConfigError(std::string(what) + " wire " + std::to_string(w) + " outside register");
      }
      if (!seen.insert(w).second) {
        throw ConfigError(std::string(what) + " wire " + std::to_string(w) + " listed twice");
      }
    }
  };
  check(parameterized_wires, "parameterized");
  check(measured_wires, "measured");
}

std::size_t param_count(const CircuitSpec& spec) {
  return spec.theta_count() + spec.measured_wires.size();
}

VqcModel VqcModel::zeros(CircuitSpec spec) {
  spec.validate();
  VqcModel m;
  m.thetas.assign(spec.theta_count(), 0.0);
  m.bias.assign(spec.measured_wires.size(), 0.0);
  m.spec = std::move(spec);
  return m;
}

VqcModel VqcModel::random(CircuitSpec spec, std::mt19937_64& rng) {
  VqcModel m = zeros(std::move(spec));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (auto& t : m.thetas) t = angle(rng);
  return m;
}

std::vector<double> VqcModel::flat_parameters() const {
  std::vector<double> flat(thetas);
  flat.insert(flat.end(), bias.begin(), bias.end());
  return flat;
}

void VqcModel::set_flat_parameters(const std::vector<double>& flat) {
  if (flat.size() != thetas.size() + bias.size()) {
    throw ArgumentError("parameter vector has " + std::to_string(flat.size()) + " entries, model has " +
                        std::to_string(thetas.size() + bias.size()));
  }
  std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(thetas.size()), thetas.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(thetas.size()), flat.end(), bias.begin());
}

EncodedInput encode(std::size_t state_index, int n_qubits) {
  if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) {
    throw EncodingError("register size " + std::to_string(n_qubits) + " outside [1, 10]");
  }
  if (state_index >= (std::size_t{1} << n_qubits)) {
    throw EncodingError("state " + std::to_string(state_index) + " does not fit in " +
                        std::to_string(n_qubits) + " qubits");
  }
  EncodedInput in;
  in.state_index = state_index;
  for (int i = 0; i < n_qubits; ++i) {
    const int b = static_cast<int>((state_index >> (n_qubits - 1 - i)) & 1U);
    in.bits.push_back(b);
    in.theta.push_back(std::numbers::pi * b);
    in.phi.push_back(std::numbers::pi * b);
  }
  return in;
}

std::size_t u3_gate_position(const CircuitSpec& spec, int layer, std::size_t param_wire_slot) {
  const std::size_t chain = static_cast<std::size_t>(spec.n_qubits - 1);
  const std::size_t per_layer = chain + spec.parameterized_wires.size();
  return 2 * static_cast<std::size_t>(spec.n_qubits) + static_cast<std::size_t>(layer) * per_layer +
         chain + param_wire_slot;
}

std::vector<Gate> build_circuit(const VqcModel& model, const EncodedInput& input) {
  const CircuitSpec& spec = model.spec;
  if (static_cast<int>(input.bits.size()) != spec.n_qubits) {
    throw EncodingError("input encodes " + std::to_string(input.bits.size()) +
                        " qubits, circuit has " + std::to_string(spec.n_qubits));
  }
  std::vector<Gate> gates;
  gates.reserve(2 * spec.n_qubits +
                spec.n_layers * (spec.n_qubits - 1 + spec.parameterized_wires.size()));
  for (int w = 0; w < spec.n_qubits; ++w) {
    gates.push_back(Gate::rx(w, input.theta[w]));
    gates.push_back(Gate::rz(w, input.phi[w]));
  }
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (int w = 0; w + 1 < spec.n_qubits; ++w) gates.push_back(Gate::cnot(w, w + 1));
    for (std::size_t k = 0; k < spec.parameterized_wires.size(); ++k) {
      const std::size_t i = model.theta_index(layer, k, 0);
      gates.push_back(Gate::u3(spec.parameterized_wires[k], model.thetas[i], model.thetas[i + 1],
                               model.thetas[i + 2]));
    }
  }
  return gates;
}

bool is_stochastic(const Backend& b) { return !std::holds_alternative<backend::Analytic>(b); }

Backend reseeded(const Backend& b, std::uint64_t seed) {
  Backend out = b;
  if (auto* s = std::get_if<backend::Shots>(&out)) s->seed = seed;
  if (auto* t = std::get_if<backend::TrajectoryAverage>(&out)) t->seed = seed;
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> measure(const CircuitSpec& spec, const std::vector<Gate>& gates,
                            const Backend& backend) {
  if (const auto* shots = std::get_if<backend::Shots>(&backend)) {
    return measure_shots(spec, gates, *shots);
  }
  if (const auto* traj = std::get_if<backend::TrajectoryAverage>(&backend)) {
    return measure_trajectories(spec, gates, *traj);
  }
  const auto sv = qsim::run_circuit(StateVector::zero(spec.n_qubits), gates);
  return select_measured(spec, qsim::prob_one_all(sv));
}

std::vector<double> forward(const VqcModel& model, std::size_t state_index, const Backend& backend) {
  const auto gates = build_circuit(model, encode(state_index, model.spec.n_qubits));
  auto q = measure(model.spec, gates, backend);
  for (std::size_t k = 0; k < q.size(); ++k) q[k] += model.bias[k];
  return q;
}

Gradient parameter_shift_grad(const VqcModel& model, std::size_t state_index, std::size_t output) {
  const CircuitSpec& spec = model.spec;
  if (output >= spec.measured_wires.size()) {
    throw IndexError("output " + std::to_string(output) + " outside " +
                     std::to_string(spec.measured_wires.size()) + " measured wires");
  }
  const int wire = spec.measured_wires[output];
  auto gates = build_circuit(model, encode(state_index, spec.n_qubits));

  // Shifted circuits share everything before the shifted gate, so the state
  // entering each gate is computed once and each shift replays only the suffix.
  std::vector<StateVector> before;
  before.reserve(gates.size());
  StateVector sv = StateVector::zero(spec.n_qubits);
  for (const auto& g : gates) {
    before.push_back(sv);
    sv = qsim::apply_gate(std::move(sv), g);
  }

  Gradient grad;
  grad.value = observe(spec.observable, qsim::prob_one(sv, wire)) + model.bias[output];
  grad.thetas.assign(model.thetas.size(), 0.0);
  grad.bias.assign(model.bias.size(), 0.0);
  grad.bias[output] = 1.0;

  auto shifted_value = [&](std::size_t pos, int angle, double delta) {
    Gate g = gates[pos];
    g.angles[angle] += delta;
    StateVector s = qsim::apply_gate(before[pos], g);
    for (std::size_t i = pos + 1; i < gates.size(); ++i) s = qsim::apply_gate(std::move(s), gates[i]);
    return observe(spec.observable, qsim::prob_one(s, wire));
  };

  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (std::size_t k = 0; k < spec.parameterized_wires.size(); ++k) {
      const std::size_t pos = u3_gate_position(spec, layer, k);
      for (int angle = 0; angle < 3; ++angle) {
        const double plus = shifted_value(pos, angle, kShift);
        const double minus = shifted_value(pos, angle, -kShift);
        grad.thetas[model.theta_index(layer, k, angle)] = 0.5 * (plus - minus);
      }
    }
  }
  return grad;
}

Gradient parameter_shift_grad(const VqcModel& model, std::size_t state_index, std::size_t output,
                              const Backend& backend) {
  if (!is_stochastic(backend)) return parameter_shift_grad(model, state_index, output);
  const CircuitSpec& spec = model.spec;
  if (output >= spec.measured_wires.size()) {
    throw IndexError("output " + std::to_string(output) + " outside measured wires");
  }
  const std::uint64_t base = std::holds_alternative<backend::Shots>(backend)
                                 ? std::get<backend::Shots>(backend).seed
                                 : std::get<backend::TrajectoryAverage>(backend).seed;
  const auto gates = build_circuit(model, encode(state_index, spec.n_qubits));
  std::uint64_t evaluation = 0;
  auto estimate = [&](const std::vector<Gate>& circuit) {
    return measure(spec, circuit, reseeded(backend, derive_seed(base, evaluation++)))[output];
  };

  Gradient grad;
  grad.value = estimate(gates) + model.bias[output];
  grad.thetas.assign(model.thetas.size(), 0.0);
  grad.bias.assign(model.bias.size(), 0.0);
  grad.bias[output] = 1.0;
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (std::size_t k = 0; k < spec.parameterized_wires.size(); ++k) {
      const std::size_t pos = u3_gate_position(spec, layer, k);
      for (int angle = 0; angle < 3; ++angle) {
        auto shifted = gates;
        shifted[pos].angles[angle] += kShift;
        const double plus = estimate(shifted);
        shifted[pos].angles[angle] -= 2 * kShift;
        const double minus = estimate(shifted);
        grad.thetas[model.theta_index(layer, k, angle)] = 0.5 * (plus - minus);
      }
    }
  }
  return grad;
}

}  // namespace vqdqn::vqc
