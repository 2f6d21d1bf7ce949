#pragma once
// Run configuration: named presets for the published experiments plus a
// fail-closed TOML-style file format (sections, scalars, flat number arrays;
// unknown keys are errors carrying the full key path).

#include <stdexcept>
#include <string>
#include <vector>

#include "vpf/model.hpp"
#include "vpf/solver.hpp"

namespace vpf {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct RunConfig {
    ModelParams model;
    RunControl control;
    std::string preset;
    std::string out_dir = "out";
    int output_stride = 40;
    std::uint64_t seed = 9231;
    int threads = 1;
};

std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);  // ConfigError on unknown name

// overlays file settings onto cfg (defaults or preset values)
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_config_text(RunConfig& cfg, const std::string& text);  // same, from memory

}  // namespace vpf
