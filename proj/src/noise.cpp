#include "vqdqn/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "vqdqn/errors.hpp"

namespace vqdqn::noise {
namespace {

const std::string kQubitHeader = "qubit,t1_us,t2_us,frequency_ghz";
const std::string kGateHeader =
    "qubit,id_error,u1_error,u2_error,u3_error,readout_error,id_length_ns,u1_length_ns,"
    "u2_length_ns,u3_length_ns";
const std::string kCouplingHeader = "control,target,cnot_error,cnot_length_ns";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  return cells;
}

double to_double(const std::string& cell, std::size_t line) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || cell.empty()) {
    throw ParseError(line, "expected a number, got '" + cell + "'");
  }
  return value;
}

int to_int(const std::string& cell, std::size_t line) {
  int value = 0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || cell.empty()) {
    throw ParseError(line, "expected an integer, got '" + cell + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void check_unit(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(what + " = " + format_double(p) + " outside [0, 1]");
  }
}

}  // namespace

const Coupling* DeviceProperties::find_coupling(int control, int target) const {
  for (const auto& c : couplings) {
    if (c.control == control && c.target == target) return &c;
  }
  return nullptr;
}

void DeviceProperties::validate() const {
  if (qubits.empty()) throw ValidationError("device has no qubits");
  if (couplings.empty()) throw ValidationError("device has no CNOT couplings");
  for (std::size_t q = 0; q < qubits.size(); ++q) {
    const auto& p = qubits[q];
    const std::string tag = "qubit " + std::to_string(q);
    if (!(p.t1_us > 0.0)) throw ValidationError(tag + " T1 must be positive");
    if (!(p.t2_us > 0.0)) throw ValidationError(tag + " T2 must be positive");
    check_unit(p.id_error, tag + " id_error");
    check_unit(p.u1_error, tag + " u1_error");
    check_unit(p.u2_error, tag + " u2_error");
    check_unit(p.u3_error, tag + " u3_error");
    check_unit(p.readout_error, tag + " readout_error");
    if (p.u1_error != 0.0) throw ValidationError(tag + " u1_error must be zero (virtual gate)");
    for (double len : {p.id_length_ns, p.u1_length_ns, p.u2_length_ns, p.u3_length_ns}) {
      if (!(len >= 0.0)) throw ValidationError(tag + " gate lengths must be non-negative");
    }
  }
  const int n = static_cast<int>(qubits.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& c : couplings) {
    const std::string tag =
        "coupling [" + std::to_string(c.control) + ", " + std::to_string(c.target) + "]";
    if (c.control < 0 || c.control >= n || c.target < 0 || c.target >= n) {
      throw ValidationError(tag + " references an unknown qubit");
    }
    if (c.control == c.target) throw ValidationError(tag + " couples a qubit to itself");
    if (!seen.insert({c.control, c.target}).second) throw ValidationError(tag + " listed twice");
    check_unit(c.cnot_error, tag + " cnot_error");
    if (!(c.cnot_length_ns >= 0.0)) throw ValidationError(tag + " length must be non-negative");
  }
  for (const auto& c : couplings) {
    if (!seen.count({c.target, c.control})) {
      throw ValidationError("coupling [" + std::to_string(c.control) + ", " +
                            std::to_string(c.target) + "] has no reverse pair");
    }
  }
}

DeviceProperties parse_device(const std::string& text) {
  enum class Section { None, Qubits, Gates, Couplings };
  DeviceProperties props;
  std::vector<bool> have_qubit, have_gates;
  Section section = Section::None;
  bool expect_header = false;
  std::set<std::string> sections_seen;

  auto qubit_slot = [&](int q, std::size_t line) -> QubitProperties& {
    if (q < 0 || q > 1023) throw ParseError(line, "qubit index " + std::to_string(q) + " out of range");
    if (static_cast<std::size_t>(q) >= props.qubits.size()) {
      props.qubits.resize(q + 1);
      have_qubit.resize(q + 1, false);
      have_gates.resize(q + 1, false);
    }
    return props.qubits[q];
  };

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line == "[qubits]") {
        section = Section::Qubits;
      } else if (line == "[gates]") {
        section = Section::Gates;
      } else if (line == "[couplings]") {
        section = Section::Couplings;
      } else {
        throw ParseError(line_no, "unknown section " + line);
      }
      if (!sections_seen.insert(line).second) throw ParseError(line_no, "duplicate section " + line);
      expect_header = true;
      continue;
    }
    const auto cells = split_row(line);
    if (section == Section::None) {
      if (cells.size() == 2 && cells[0] == "name") {
        props.name = cells[1];
        continue;
      }
      throw ParseError(line_no, "row outside of any section");
    }
    if (expect_header) {
      const std::string& want = section == Section::Qubits  ? kQubitHeader
                                : section == Section::Gates ? kGateHeader
                                                            : kCouplingHeader;
      if (line != want) throw ParseError(line_no, "expected header '" + want + "'");
      expect_header = false;
      continue;
    }
    switch (section) {
      case Section::Qubits: {
        if (cells.size() != 4) throw ParseError(line_no, "qubit row needs 4 columns");
        const int q = to_int(cells[0], line_no);
        auto& p = qubit_slot(q, line_no);
        if (have_qubit[q]) throw ParseError(line_no, "qubit " + std::to_string(q) + " listed twice");
        have_qubit[q] = true;
        p.t1_us = to_double(cells[1], line_no);
        p.t2_us = to_double(cells[2], line_no);
        p.frequency_ghz = to_double(cells[3], line_no);
        break;
      }
      case Section::Gates: {
        if (cells.size() != 10) throw ParseError(line_no, "gate row needs 10 columns");
        const int q = to_int(cells[0], line_no);
        auto& p = qubit_slot(q, line_no);
        if (have_gates[q]) throw ParseError(line_no, "gates for qubit " + std::to_string(q) + " listed twice");
        have_gates[q] = true;
        p.id_error = to_double(cells[1], line_no);
        p.u1_error = to_double(cells[2], line_no);
        p.u2_error = to_double(cells[3], line_no);
        p.u3_error = to_double(cells[4], line_no);
        p.readout_error = to_double(cells[5], line_no);
        p.id_length_ns = to_double(cells[6], line_no);
        p.u1_length_ns = to_double(cells[7], line_no);
        p.u2_length_ns = to_double(cells[8], line_no);
        p.u3_length_ns = to_double(cells[9], line_no);
        break;
      }
      case Section::Couplings: {
        if (cells.size() != 4) throw ParseError(line_no, "coupling row needs 4 columns");
        Coupling c;
        c.control = to_int(cells[0], line_no);
        c.target = to_int(cells[1], line_no);
        c.cnot_error = to_double(cells[2], line_no);
        c.cnot_length_ns = to_double(cells[3], line_no);
        props.couplings.push_back(c);
        break;
      }
      case Section::None:
        break;
    }
  }
  for (const char* s : {"[qubits]", "[gates]", "[couplings]"}) {
    if (!sections_seen.count(s)) throw ValidationError(std::string("device file lacks section ") + s);
  }
  for (std::size_t q = 0; q < props.qubits.size(); ++q) {
    if (!have_qubit[q]) throw ValidationError("qubit " + std::to_string(q) + " missing from [qubits]");
    if (!have_gates[q]) throw ValidationError("qubit " + std::to_string(q) + " missing from [gates]");
  }
  props.validate();
  return props;
}

DeviceProperties parse_device_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open device file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_device(ss.str());
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

std::string serialize_device(const DeviceProperties& props) {
  std::ostringstream out;
  if (!props.name.empty()) out << "name," << props.name << "\n";
  out << "[qubits]\n" << kQubitHeader << "\n";
  for (std::size_t q = 0; q < props.qubits.size(); ++q) {
    const auto& p = props.qubits[q];
    out << q << ',' << format_double(p.t1_us) << ',' << format_double(p.t2_us) << ','
        << format_double(p.frequency_ghz) << "\n";
  }
  out << "[gates]\n" << kGateHeader << "\n";
  for (std::size_t q = 0; q < props.qubits.size(); ++q) {
    const auto& p = props.qubits[q];
    out << q;
    for (double v : {p.id_error, p.u1_error, p.u2_error, p.u3_error, p.readout_error,
                     p.id_length_ns, p.u1_length_ns, p.u2_length_ns, p.u3_length_ns}) {
      out << ',' << format_double(v);
    }
    out << "\n";
  }
  out << "[couplings]\n" << kCouplingHeader << "\n";
  for (const auto& c : props.couplings) {
    out << c.control << ',' << c.target << ',' << format_double(c.cnot_error) << ','
        << format_double(c.cnot_length_ns) << "\n";
  }
  return out.str();
}

double relaxation_probability(double gate_length_ns, double t1_us) {
  return 1.0 - std::exp(-(gate_length_ns * 1e-3) / t1_us);
}

qsim::NoiseModel synthesize_noise_model(const DeviceProperties& props,
                                        const std::vector<int>& assignment) {
  const int n_device = static_cast<int>(props.qubits.size());
  std::set<int> used;
  for (int q : assignment) {
    if (q < 0 || q >= n_device) {
      throw MappingError("assignment uses device qubit " + std::to_string(q) + ", device has " +
                         std::to_string(n_device));
    }
    if (!used.insert(q).second) {
      throw MappingError("assignment uses device qubit " + std::to_string(q) + " twice");
    }
  }
  qsim::NoiseModel model;
  std::vector<double> single;
  for (int q : assignment) {
    const auto& p = props.qubits[q];
    const double depol = std::max(p.u3_error, relaxation_probability(p.u3_length_ns, p.t1_us));
    single.push_back(std::clamp(depol, 0.0, 1.0));
    model.readout_flip.push_back(std::clamp(p.readout_error, 0.0, 1.0));
  }
  for (auto kind : {qsim::GateKind::RX, qsim::GateKind::RY, qsim::GateKind::RZ, qsim::GateKind::U3}) {
    model.single_qubit[kind] = single;
  }
  for (std::size_t k = 0; k + 1 < assignment.size(); ++k) {
    const auto* c = props.find_coupling(assignment[k], assignment[k + 1]);
    if (c == nullptr) {
      throw MappingError("device has no coupling [" + std::to_string(assignment[k]) + ", " +
                         std::to_string(assignment[k + 1]) + "] for CNOT " + std::to_string(k) +
                         " -> " + std::to_string(k + 1));
    }
    model.two_qubit[{static_cast<int>(k), static_cast<int>(k + 1)}] =
        std::clamp(c->cnot_error, 0.0, 1.0);
  }
  model.validate();
  return model;
}

std::vector<int> find_linear_chain(const DeviceProperties& props, int n) {
  const int n_device = static_cast<int>(props.qubits.size());
  if (n < 1 || n > n_device) {
    throw MappingError("cannot place " + std::to_string(n) + " wires on a " +
                       std::to_string(n_device) + "-qubit device");
  }
  std::vector<int> path;
  std::vector<bool> used(n_device, false);
  std::function<bool()> extend = [&]() {
    if (static_cast<int>(path.size()) == n) return true;
    for (int q = 0; q < n_device; ++q) {
      if (used[q]) continue;
      if (!path.empty() && props.find_coupling(path.back(), q) == nullptr) continue;
      used[q] = true;
      path.push_back(q);
      if (extend()) return true;
      path.pop_back();
      used[q] = false;
    }
    return false;
  };
  if (!extend()) throw MappingError("device has no coupled chain of " + std::to_string(n) + " qubits");
  return path;
}

}  // namespace vqdqn::noise
