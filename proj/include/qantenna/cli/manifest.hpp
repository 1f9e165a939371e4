#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace qantenna::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string file;   // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string name;
    std::string kind;
    std::string version;
    std::uint64_t seed = 0;
    nlohmann::json config;
    double wall_time_s = 0.0;
    std::vector<ManifestEntry> outputs;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

// Checksums every file in outputs (relative to dir) and writes manifest.json.
std::filesystem::path write_manifest(const std::filesystem::path& dir, RunManifest manifest,
                                     const std::vector<std::string>& outputs);

std::string version();

}  // namespace qantenna::cli
