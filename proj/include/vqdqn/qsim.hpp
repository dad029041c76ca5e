#pragma once

// Few-qubit statevector simulator.
//
// Wire convention: wires are numbered 0..n-1 and wire 0 is the most
// significant bit of the amplitude index, so the basis state |b0 b1 ... b(n-1)>
// lives at index b0*2^(n-1) + ... + b(n-1). Measurement wire k is action k.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace vqdqn::qsim {

using Complex = std::complex<double>;
using Matrix2 = std::array<Complex, 4>;  // row-major 2x2

inline constexpr int kMaxQubits = 10;

struct Gate;

class StateVector {
 public:
  /// |0...0> on n wires. Throws ConfigError unless 1 <= n <= kMaxQubits.
  static StateVector zero(int n_qubits);
  /// Computational basis state with the given index.
  static StateVector basis(int n_qubits, std::size_t index);
  /// Takes ownership of explicit amplitudes; throws if the length is not a
  /// power of two or the vector is not normalized within 1e-10.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  double norm_squared() const noexcept;

 private:
  StateVector(int n, std::vector<Complex> amps) : n_qubits_(n), amps_(std::move(amps)) {}

  friend StateVector apply_matrix(StateVector, int, const Matrix2&);
  friend StateVector apply_gate(StateVector, const Gate&);

  int n_qubits_ = 0;
  std::vector<Complex> amps_;
};

enum class GateKind { RX, RY, RZ, CNOT, U3 };

const char* to_string(GateKind kind) noexcept;

/// One circuit element. U3 carries (alpha, beta, gamma) and acts as
/// RZ(alpha) * RY(beta) * RZ(gamma) in operator order, so RZ(gamma) is applied
/// first. Rotation gates use angles[0] only.
struct Gate {
  GateKind kind = GateKind::RX;
  int target = 0;
  int control = -1;
  std::array<double, 3> angles{};

  static Gate rx(int wire, double theta) { return {GateKind::RX, wire, -1, {theta, 0, 0}}; }
  static Gate ry(int wire, double theta) { return {GateKind::RY, wire, -1, {theta, 0, 0}}; }
  static Gate rz(int wire, double theta) { return {GateKind::RZ, wire, -1, {theta, 0, 0}}; }
  static Gate u3(int wire, double alpha, double beta, double gamma) {
    return {GateKind::U3, wire, -1, {alpha, beta, gamma}};
  }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, {}}; }

  bool is_two_qubit() const noexcept { return kind == GateKind::CNOT; }
  /// Number of meaningful entries in `angles`.
  int angle_count() const noexcept;

  bool operator==(const Gate&) const = default;
};

/// 2x2 unitary of a single-qubit gate. Throws ArgumentError for CNOT.
Matrix2 gate_matrix(const Gate& g);

Matrix2 rx_matrix(double theta);
Matrix2 ry_matrix(double theta);
Matrix2 rz_matrix(double theta);
Matrix2 pauli_x();
Matrix2 pauli_y();
Matrix2 pauli_z();

/// Max-norm distance of U^dagger U from the identity.
double unitarity_defect(const Matrix2& u);

/// Applies `g`. Takes the state by value so callers can move a scratch state
/// through a circuit without copies. Throws IndexError on bad wires.
StateVector apply_gate(StateVector sv, const Gate& g);
StateVector apply_matrix(StateVector sv, int wire, const Matrix2& u);

StateVector run_circuit(StateVector sv, std::span<const Gate> gates);

/// Probability that `wire` measures 1.
double prob_one(const StateVector& sv, int wire);
/// prob_one for every wire in one pass.
std::vector<double> prob_one_all(const StateVector& sv);

/// Depolarizing and readout parameters for logical wires.
///
/// Single-qubit depolarizing probabilities are stored per gate kind and wire,
/// two-qubit ones per ordered (control, target) pair. A missing entry means
/// no error for that gate.
struct NoiseModel {
  std::map<GateKind, std::vector<double>> single_qubit;
  std::map<std::pair<int, int>, double> two_qubit;
  std::vector<double> readout_flip;

  double single(GateKind kind, int wire) const;
  double pair(int control, int target) const;
  double readout(int wire) const;

  /// Throws ConfigError if any probability lies outside [0, 1].
  void validate() const;
  bool is_noiseless() const;
};

/// Per-wire frequency of outcome 1 over `shots` projective measurements of
/// every wire. With a noise model, each sampled bit is flipped with that
/// wire's readout probability. Deterministic for a fixed seed.
std::vector<double> sample_shots(const StateVector& sv, int shots, std::uint64_t seed,
                                 const std::optional<NoiseModel>& noise = std::nullopt);

/// Adds the outcome-1 counts of `shots` samples to `counts` (one entry per
/// wire). Building block of sample_shots, reused by trajectory sampling.
void accumulate_shots(const StateVector& sv, int shots, std::mt19937_64& rng,
                      const NoiseModel* noise, std::span<std::uint64_t> counts);

/// Applies `g`, then a depolarizing error: with the gate's probability p the
/// target (and, for CNOT, independently the control) receives a Pauli drawn
/// uniformly from {I, X, Y, Z}. Averaged over trajectories this is the channel
/// rho -> (1 - p) rho + p I/2 per affected qubit.
StateVector apply_noisy_gate(StateVector sv, const Gate& g, const NoiseModel& noise,
                             std::mt19937_64& rng);

/// One stochastic trajectory of a whole circuit.
StateVector run_noisy_circuit(StateVector sv, std::span<const Gate> gates,
                              const NoiseModel& noise, std::mt19937_64& rng);

}  // namespace vqdqn::qsim
