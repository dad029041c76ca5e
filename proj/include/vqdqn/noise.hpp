#pragma once

// Device calibration tables and their reduction to a qsim::NoiseModel.
//
// Device files are CSV with three sections:
//
//   # free-form comments
//   name,<device name>
//   [qubits]
//   qubit,t1_us,t2_us,frequency_ghz
//   [gates]
//   qubit,id_error,u1_error,u2_error,u3_error,readout_error,id_length_ns,u1_length_ns,u2_length_ns,u3_length_ns
//   [couplings]
//   control,target,cnot_error,cnot_length_ns
//
// The first row of each section is its header and must match exactly.

#include <filesystem>
#include <string>
#include <vector>

#include "vqdqn/qsim.hpp"

namespace vqdqn::noise {

struct QubitProperties {
  double t1_us = 0.0;
  double t2_us = 0.0;  // stored, not used by the synthesis
  double frequency_ghz = 0.0;  // stored, not used by the synthesis
  double id_error = 0.0;
  double u1_error = 0.0;
  double u2_error = 0.0;
  double u3_error = 0.0;
  double readout_error = 0.0;
  double id_length_ns = 0.0;
  double u1_length_ns = 0.0;
  double u2_length_ns = 0.0;
  double u3_length_ns = 0.0;

  bool operator==(const QubitProperties&) const = default;
};

struct Coupling {
  int control = 0;
  int target = 0;
  double cnot_error = 0.0;
  double cnot_length_ns = 0.0;

  bool operator==(const Coupling&) const = default;
};

struct DeviceProperties {
  std::string name;
  std::vector<QubitProperties> qubits;  // indexed by device qubit
  std::vector<Coupling> couplings;

  const Coupling* find_coupling(int control, int target) const;
  /// Throws ValidationError: T1, T2 > 0, errors in [0, 1], U1 error zero,
  /// couplings on existing qubits and listed in both directions.
  void validate() const;

  bool operator==(const DeviceProperties&) const = default;
};

DeviceProperties parse_device(const std::string& text);
DeviceProperties parse_device_file(const std::filesystem::path& file);
std::string serialize_device(const DeviceProperties& props);

/// 1 - exp(-gate_length / T1), the probability of relaxing during the gate.
double relaxation_probability(double gate_length_ns, double t1_us);

/// Noise model for logical wires 0..n-1 placed on device qubits
/// assignment[0..n-1]. Every single-qubit gate kind gets
/// max(U3 error, relaxation over the U3 length); the CNOT chain k -> k+1 gets
/// the error of the coupling (assignment[k], assignment[k+1]); readout flips
/// come straight from the table. Throws MappingError for unknown qubits or a
/// missing coupling.
qsim::NoiseModel synthesize_noise_model(const DeviceProperties& props,
                                        const std::vector<int>& assignment);

/// Lexicographically smallest chain of n distinct device qubits in which each
/// consecutive ordered pair is a coupling. Throws MappingError if none exists.
std::vector<int> find_linear_chain(const DeviceProperties& props, int n);

}  // namespace vqdqn::noise
