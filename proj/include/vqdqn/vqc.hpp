#pragma once

// Variational Q-function circuit: basis encoding, a CNOT chain plus U3 layer
// repeated n_layers times, per-wire readout plus a classical bias.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "vqdqn/qsim.hpp"

namespace vqdqn::vqc {

/// Quantity read off each measured wire before the bias is added.
enum class Observable {
  ProbOne,  // P(wire = 1)
  PauliZ,   // <Z> = 1 - 2 P(wire = 1)
};

struct CircuitSpec {
  int n_qubits = 4;
  int n_layers = 2;
  std::vector<int> parameterized_wires;  // wires carrying a U3 in every layer
  std::vector<int> measured_wires;       // output k is action k
  Observable observable = Observable::ProbOne;

  /// Every wire parameterized and measured.
  static CircuitSpec uniform(int n_qubits, int n_layers = 2);
  /// Circuit for the n-channel radio task. Three channels need 9 states, so
  /// they get a fourth wire that is neither parameterized nor measured.
  static CircuitSpec radio(int n_channels, int n_layers = 2);
  static CircuitSpec frozen_lake(int n_layers = 2);

  std::size_t n_actions() const { return measured_wires.size(); }
  std::size_t theta_count() const {
    return parameterized_wires.size() * 3 * static_cast<std::size_t>(n_layers);
  }
  std::size_t n_states_supported() const { return std::size_t{1} << n_qubits; }

  /// Throws ConfigError on out-of-range or duplicate wires.
  void validate() const;

  bool operator==(const CircuitSpec&) const = default;
};

/// Trainable parameters including the bias vector.
std::size_t param_count(const CircuitSpec& spec);

struct VqcModel {
  CircuitSpec spec;
  /// Flat (layer, parameterized wire, {alpha, beta, gamma}) in that nesting order.
  std::vector<double> thetas;
  std::vector<double> bias;

  static VqcModel zeros(CircuitSpec spec);
  /// Angles uniform on [0, 2pi), bias zero.
  static VqcModel random(CircuitSpec spec, std::mt19937_64& rng);

  std::size_t theta_index(int layer, std::size_t param_wire_slot, int angle) const {
    return (static_cast<std::size_t>(layer) * spec.parameterized_wires.size() + param_wire_slot) *
               3 +
           static_cast<std::size_t>(angle);
  }

  /// Concatenation thetas ++ bias, the layout the optimizer works on.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& flat);

  bool operator==(const VqcModel&) const = default;
};

struct EncodedInput {
  std::size_t state_index = 0;
  std::vector<int> bits;      // b_1 ... b_n, most significant first
  std::vector<double> theta;  // RX angles, pi * b_i
  std::vector<double> phi;    // RZ angles, pi * b_i
};

/// Big-endian binary digits of `state_index` as rotation angles. Throws
/// EncodingError unless state_index < 2^n_qubits.
EncodedInput encode(std::size_t state_index, int n_qubits);

/// RX, RZ per wire; then per layer the CNOT chain 0->1->...->n-1 followed by
/// one U3 per parameterized wire.
std::vector<qsim::Gate> build_circuit(const VqcModel& model, const EncodedInput& input);

/// Index in build_circuit's output of the U3 for (layer, slot).
std::size_t u3_gate_position(const CircuitSpec& spec, int layer, std::size_t param_wire_slot);

namespace backend {

struct Analytic {};

/// Shot-estimated expectations. Each trajectory samples gate noise once and
/// then draws shots/trajectories measurements from it; trajectories == 0
/// means one trajectory per shot.
struct Shots {
  int shots = 1024;
  std::uint64_t seed = 0;
  std::optional<qsim::NoiseModel> noise;
  int trajectories = 0;
};

/// Noisy expectation without shot noise: the exact per-wire probabilities of
/// `trajectories` sampled noise trajectories are averaged and the readout flip
/// is applied in closed form.
struct TrajectoryAverage {
  qsim::NoiseModel noise;
  int trajectories = 16;
  std::uint64_t seed = 0;
};

}  // namespace backend

using Backend = std::variant<backend::Analytic, backend::Shots, backend::TrajectoryAverage>;

bool is_stochastic(const Backend& b);
/// Copy of a stochastic backend with its seed replaced.
Backend reseeded(const Backend& b, std::uint64_t seed);

/// Measured-wire observables for an already built circuit (no bias).
std::vector<double> measure(const CircuitSpec& spec, const std::vector<qsim::Gate>& gates,
                            const Backend& backend);

/// Q-values: observable of each measured wire plus its bias entry.
std::vector<double> forward(const VqcModel& model, std::size_t state_index,
                            const Backend& backend = backend::Analytic{});

struct Gradient {
  std::vector<double> thetas;
  std::vector<double> bias;
  double value = 0.0;  // Q-value of the differentiated output
};

/// d Q_output / d parameters by the two-term shift rule,
/// [E(p + pi/2) - E(p - pi/2)] / 2 per angle, exact expectations.
Gradient parameter_shift_grad(const VqcModel& model, std::size_t state_index, std::size_t output);

/// Same rule with expectations estimated by a stochastic backend. Each
/// shifted circuit gets its own seed derived from the backend seed.
Gradient parameter_shift_grad(const VqcModel& model, std::size_t state_index, std::size_t output,
                              const Backend& backend);

/// Mixes a base seed and a counter into a well-spread 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace vqdqn::vqc
