#include "vqdqn/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vqdqn/errors.hpp"

namespace vqdqn::qsim {
namespace {

constexpr Complex kI{0.0, 1.0};

void check_wire(int wire, int n_qubits) {
  if (wire < 0 || wire >= n_qubits) {
    throw IndexError("wire " + std::to_string(wire) + " outside register of " +
                     std::to_string(n_qubits) + " qubits");
  }
}

std::size_t bit_of(int wire, int n_qubits) { return std::size_t{1} << (n_qubits - 1 - wire); }

Matrix2 multiply(const Matrix2& a, const Matrix2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(what + " probability " + std::to_string(p) + " outside [0, 1]");
  }
}

// Uniform over {I, X, Y, Z}; identity draws leave the state untouched.
StateVector depolarize(StateVector sv, int wire, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  switch (pick(rng)) {
    case 1:
      return apply_matrix(std::move(sv), wire, pauli_x());
    case 2:
      return apply_matrix(std::move(sv), wire, pauli_y());
    case 3:
      return apply_matrix(std::move(sv), wire, pauli_z());
    default:
      return sv;
  }
}

}  // namespace

StateVector StateVector::zero(int n_qubits) { return basis(n_qubits, 0); }

StateVector StateVector::basis(int n_qubits, std::size_t index) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("register size " + std::to_string(n_qubits) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
  }
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (index >= dim) {
    throw IndexError("basis index " + std::to_string(index) + " outside register");
  }
  std::vector<Complex> amps(dim);
  amps[index] = 1.0;
  return StateVector(n_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if (dim < 2 || (std::size_t{1} << n) != dim || n > kMaxQubits) {
    throw ConfigError("amplitude count " + std::to_string(dim) + " is not 2^n for 1 <= n <= 10");
  }
  StateVector sv(n, std::move(amplitudes));
  if (std::abs(sv.norm_squared() - 1.0) > 1e-10) {
    throw ConfigError("amplitudes are not normalized");
  }
  return sv;
}

double StateVector::norm_squared() const noexcept {
  double total = 0.0;
  for (const auto& c : amps_) total += std::norm(c);
  return total;
}

const char* to_string(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::RX:
      return "RX";
    case GateKind::RY:
      return "RY";
    case GateKind::RZ:
      return "RZ";
    case GateKind::CNOT:
      return "CNOT";
    case GateKind::U3:
      return "U3";
  }
  return "?";
}

int Gate::angle_count() const noexcept {
  switch (kind) {
    case GateKind::CNOT:
      return 0;
    case GateKind::U3:
      return 3;
    default:
      return 1;
  }
}

Matrix2 rx_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {c, -kI * s, -kI * s, c};
}

Matrix2 ry_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {c, -s, s, c};
}

Matrix2 rz_matrix(double theta) {
  return {std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2)};
}

Matrix2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
Matrix2 pauli_y() { return {0.0, -kI, kI, 0.0}; }
Matrix2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

Matrix2 gate_matrix(const Gate& g) {
  switch (g.kind) {
    case GateKind::RX:
      return rx_matrix(g.angles[0]);
    case GateKind::RY:
      return ry_matrix(g.angles[0]);
    case GateKind::RZ:
      return rz_matrix(g.angles[0]);
    case GateKind::U3:
      return multiply(rz_matrix(g.angles[0]),
                      multiply(ry_matrix(g.angles[1]), rz_matrix(g.angles[2])));
    case GateKind::CNOT:
      break;
  }
  throw ArgumentError("CNOT has no single-qubit matrix");
}

double unitarity_defect(const Matrix2& u) {
  // (U^dagger U)_{ij} = sum_k conj(U_{ki}) U_{kj}
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex entry = std::conj(u[i]) * u[j] + std::conj(u[2 + i]) * u[2 + j];
      if (i == j) entry -= 1.0;
      worst = std::max(worst, std::abs(entry));
    }
  }
  return worst;
}

StateVector apply_matrix(StateVector sv, int wire, const Matrix2& u) {
  const int n = sv.n_qubits_;
  check_wire(wire, n);
  const std::size_t stride = bit_of(wire, n);
  const std::size_t dim = sv.amps_.size();
  auto* a = sv.amps_.data();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex lo = a[i];
      const Complex hi = a[i + stride];
      a[i] = u[0] * lo + u[1] * hi;
      a[i + stride] = u[2] * lo + u[3] * hi;
    }
  }
  return sv;
}

StateVector apply_gate(StateVector sv, const Gate& g) {
  const int n = sv.n_qubits_;
  check_wire(g.target, n);
  if (g.kind != GateKind::CNOT) {
    return apply_matrix(std::move(sv), g.target, gate_matrix(g));
  }
  check_wire(g.control, n);
  if (g.control == g.target) {
    throw IndexError("CNOT control and target are both wire " + std::to_string(g.target));
  }
  const std::size_t cbit = bit_of(g.control, n);
  const std::size_t tbit = bit_of(g.target, n);
  for (std::size_t i = 0; i < sv.amps_.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(sv.amps_[i], sv.amps_[i | tbit]);
  }
  return sv;
}

StateVector run_circuit(StateVector sv, std::span<const Gate> gates) {
  for (const auto& g : gates) sv = apply_gate(std::move(sv), g);
  return sv;
}

double prob_one(const StateVector& sv, int wire) {
  check_wire(wire, sv.n_qubits());
  const std::size_t bit = bit_of(wire, sv.n_qubits());
  double p = 0.0;
  const auto amps = sv.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & bit) p += std::norm(amps[i]);
  }
  return p;
}

std::vector<double> prob_one_all(const StateVector& sv) {
  const int n = sv.n_qubits();
  std::vector<double> p(n, 0.0);
  const auto amps = sv.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double w = std::norm(amps[i]);
    if (w == 0.0) continue;
    for (int q = 0; q < n; ++q) {
      if (i & bit_of(q, n)) p[q] += w;
    }
  }
  return p;
}

double NoiseModel::single(GateKind kind, int wire) const {
  auto it = single_qubit.find(kind);
  if (it == single_qubit.end() || wire < 0 || wire >= static_cast<int>(it->second.size())) {
    return 0.0;
  }
  return it->second[wire];
}

double NoiseModel::pair(int control, int target) const {
  auto it = two_qubit.find({control, target});
  return it == two_qubit.end() ? 0.0 : it->second;
}

double NoiseModel::readout(int wire) const {
  if (wire < 0 || wire >= static_cast<int>(readout_flip.size())) return 0.0;
  return readout_flip[wire];
}

void NoiseModel::validate() const {
  for (const auto& [kind, probs] : single_qubit) {
    for (std::size_t w = 0; w < probs.size(); ++w) {
      check_probability(probs[w], std::string(to_string(kind)) + " wire " + std::to_string(w));
    }
  }
  for (const auto& [wires, p] : two_qubit) {
    check_probability(p, "CNOT pair (" + std::to_string(wires.first) + "," +
                             std::to_string(wires.second) + ")");
  }
  for (std::size_t w = 0; w < readout_flip.size(); ++w) {
    check_probability(readout_flip[w], "readout wire " + std::to_string(w));
  }
}

bool NoiseModel::is_noiseless() const {
  auto zero = [](double p) { return p == 0.0; };
  for (const auto& [kind, probs] : single_qubit) {
    if (!std::all_of(probs.begin(), probs.end(), zero)) return false;
  }
  for (const auto& [wires, p] : two_qubit) {
    if (p != 0.0) return false;
  }
  return std::all_of(readout_flip.begin(), readout_flip.end(), zero);
}

void accumulate_shots(const StateVector& sv, int shots, std::mt19937_64& rng,
                      const NoiseModel* noise, std::span<std::uint64_t> counts) {
  const int n = sv.n_qubits();
  const auto amps = sv.amplitudes();
  std::vector<double> cumulative(amps.size());
  double running = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    running += std::norm(amps[i]);
    cumulative[i] = running;
  }
  std::vector<double> flip(n, 0.0);
  bool any_flip = false;
  if (noise != nullptr) {
    for (int q = 0; q < n; ++q) {
      flip[q] = noise->readout(q);
      any_flip = any_flip || flip[q] > 0.0;
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < shots; ++s) {
    const double u = unit(rng) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t outcome = static_cast<std::size_t>(it - cumulative.begin());
    if (outcome >= amps.size()) outcome = amps.size() - 1;
    for (int q = 0; q < n; ++q) {
      bool bit = (outcome & bit_of(q, n)) != 0;
      if (any_flip && flip[q] > 0.0 && unit(rng) < flip[q]) bit = !bit;
      if (bit) ++counts[q];
    }
  }
}

std::vector<double> sample_shots(const StateVector& sv, int shots, std::uint64_t seed,
                                 const std::optional<NoiseModel>& noise) {
  if (shots < 1) throw ArgumentError("shot count must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(sv.n_qubits(), 0);
  accumulate_shots(sv, shots, rng, noise ? &*noise : nullptr, counts);
  std::vector<double> freq(counts.size());
  for (std::size_t q = 0; q < counts.size(); ++q) {
    freq[q] = static_cast<double>(counts[q]) / shots;
  }
  return freq;
}

StateVector apply_noisy_gate(StateVector sv, const Gate& g, const NoiseModel& noise,
                             std::mt19937_64& rng) {
  sv = apply_gate(std::move(sv), g);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (g.kind == GateKind::CNOT) {
    const double p = noise.pair(g.control, g.target);
    if (p <= 0.0) return sv;
    if (unit(rng) < p) sv = depolarize(std::move(sv), g.control, rng);
    if (unit(rng) < p) sv = depolarize(std::move(sv), g.target, rng);
    return sv;
  }
  const double p = noise.single(g.kind, g.target);
  if (p > 0.0 && unit(rng) < p) sv = depolarize(std::move(sv), g.target, rng);
  return sv;
}

StateVector run_noisy_circuit(StateVector sv, std::span<const Gate> gates,
                              const NoiseModel& noise, std::mt19937_64& rng) {
  for (const auto& g : gates) sv = apply_noisy_gate(std::move(sv), g, noise, rng);
  return sv;
}

}  // namespace vqdqn::qsim
