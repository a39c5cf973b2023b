#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfsim/config.hpp"
#include "hfsim/report.hpp"

namespace hfsim {

// Default initial data on the grid: N particles, see README for the profiles.
Ensemble initial_data(const ExperimentConfig& cfg, const SpectralGrid& g);

// Dispatches on cfg.kind and writes report.json plus CSV tables into `out`.
// The report carries the seed and config hash; outputs depend only on cfg.
ScanReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

nlohmann::ordered_json error_json(const std::string& type, const std::string& message,
                                  const std::vector<std::string>& violations = {});

}  // namespace hfsim
