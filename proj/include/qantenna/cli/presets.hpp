#pragma once

#include <string>
#include <vector>

namespace qantenna::cli {

struct Preset {
    std::string name;
    std::string description;
    std::string config;   // JSON config text
};

const std::vector<Preset>& presets();
// Throws std::invalid_argument for unknown names.
const Preset& find_preset(const std::string& name);

}  // namespace qantenna::cli
