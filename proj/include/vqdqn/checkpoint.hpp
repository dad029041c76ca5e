#pragma once

// JSON checkpoints: circuit spec, parameters, seed and optimizer state.
// Doubles are written in shortest round-trip form, so save/load is bit-exact.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "vqdqn/rl.hpp"
#include "vqdqn/vqc.hpp"

namespace vqdqn {

struct Checkpoint {
  vqc::VqcModel model;
  std::uint64_t seed = 0;
  std::optional<rl::RmsPropState> optimizer;

  bool operator==(const Checkpoint& o) const;
};

nlohmann::json spec_to_json(const vqc::CircuitSpec& spec);
/// Throws ConfigError on unknown keys or wrong types.
vqc::CircuitSpec spec_from_json(const nlohmann::json& j);

std::string checkpoint_to_json(const Checkpoint& ckpt);
/// Throws ConfigError on malformed documents or parameter counts that do not
/// match the spec.
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace vqdqn
