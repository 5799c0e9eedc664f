#pragma once

// Model checkpoints are JSON documents:
//   { "format": "glasdi-checkpoint/1",
//     "encoder": {layer_sizes, activation, weights: [[[row]...]...], biases},
//     "decoder": {...},
//     "basis": {poly_order, include_trig},
//     "interp": {k, p},
//     "anchors": [{"mu": [...], "xi": [[row]...]}, ...],
//     "metadata": {...} }
// Numbers are written in shortest round-trip form, so load(save(x)) is
// bitwise lossless.

#include <filesystem>

#include "json.hpp"

#include "glasdi/mlp.hpp"
#include "glasdi/rom.hpp"

namespace glasdi {

inline constexpr const char* kCheckpointFormat = "glasdi-checkpoint/1";

nlohmann::json mlp_to_json(const MlpParams& net);
MlpParams mlp_from_json(const nlohmann::json& doc);

nlohmann::json rom_to_json(const RomModel& rom, const nlohmann::json& metadata = nlohmann::json::object());
RomModel rom_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const RomModel& rom,
                     const nlohmann::json& metadata = nlohmann::json::object());
RomModel load_checkpoint(const std::filesystem::path& path);

}  // namespace glasdi
