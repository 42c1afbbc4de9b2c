#pragma once

#include <string>
#include <utility>
#include <vector>

#include "slicerec/harness/config.hpp"

namespace srec {

inline constexpr const char* kVersion = "0.1.0";

// Every run writes a manifest capturing (config, seeds, version, command).
// Deliberately no timestamps: identical inputs give byte-identical
// manifests.
std::string manifest_json(const ExperimentConfig& config, const std::string& command,
                          const std::vector<std::pair<std::string, uint64_t>>& seeds);
void write_manifest(const std::string& dir, const ExperimentConfig& config,
                    const std::string& command,
                    const std::vector<std::pair<std::string, uint64_t>>& seeds);

}  // namespace srec
