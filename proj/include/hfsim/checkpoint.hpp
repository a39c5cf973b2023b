#pragma once

#include <filesystem>

#include "hfsim/norms.hpp"

namespace hfsim {

enum class Precision { complex64, complex128 };

// Writes `<stem>.json` (grid, alpha, times, layout) and `<stem>.bin` holding
// little-endian (re, im) pairs ordered node-major, then particle, then sample.
// Nonlinearity snapshots follow the states when present.
void write_checkpoint(const std::filesystem::path& stem, const Trajectory& traj,
                      Precision precision = Precision::complex128);

// Reads the pair written by write_checkpoint; `stem` may name either file.
Trajectory read_checkpoint(const std::filesystem::path& stem);

}  // namespace hfsim
