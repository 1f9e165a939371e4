#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qantenna/cli/config.hpp"
#include "qantenna/csv.hpp"

namespace qantenna::cli {

struct RunOptions {
    std::optional<std::size_t> jobs;   // falls back to ANTENNA_JOBS, then 1
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::ostream* log = nullptr;
};

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<std::string> outputs;   // file names inside out_dir
    std::filesystem::path manifest;
    std::vector<std::string> warnings;
};

std::size_t resolve_jobs(std::optional<std::size_t> requested);

RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

// CSV column orders.
const std::vector<std::string>& purcell_columns();
const std::vector<std::string>& field_map_columns();
const std::vector<std::string>& network_columns();
const std::vector<std::string>& ensemble_columns();
const std::vector<std::string>& beta_distance_columns();
const std::vector<std::string>& rydberg_columns();

// antenna run|presets|validate; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

}  // namespace qantenna::cli
