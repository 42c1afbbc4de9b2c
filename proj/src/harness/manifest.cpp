#include "slicerec/harness/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace srec {

using nlohmann::json;

std::string manifest_json(const ExperimentConfig& config, const std::string& command,
                          const std::vector<std::pair<std::string, uint64_t>>& seeds) {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << config.hash();
    j["config_hash"] = hash.str();
    j["config"] = config.to_text();
    json s = json::object();
    for (const auto& [name, value] : seeds) s[name] = value;
    j["seeds"] = s;
    return j.dump(2);
}

void write_manifest(const std::string& dir, const ExperimentConfig& config,
                    const std::string& command,
                    const std::vector<std::pair<std::string, uint64_t>>& seeds) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / "manifest.json");
    out << manifest_json(config, command, seeds) << "\n";
}

}  // namespace srec
