#pragma once

// GLSD1 binary trajectory format (little-endian):
//   "GLSD1" | u32 N_u | u32 N_t+1 | f64 dt | u32 param_dim | f64 params[param_dim]
//   | f64 snapshots[N_t+1][N_u] | f64 derivatives[N_t+1][N_u]
// The derivative block is omitted for trajectories that carry none
// (ROM predictions); readers detect this from the payload length.

#include <filesystem>
#include <string>

#include "glasdi/fom_burgers.hpp"

namespace glasdi {

std::string encode_trajectory(const Trajectory& traj);
Trajectory decode_trajectory(const std::string& bytes);

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);

}  // namespace glasdi
