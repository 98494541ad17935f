#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apal/engine.hpp"
#include "apal/errors.hpp"

namespace apal {

inline constexpr int kSchemaVersion = 1;

/// One experiment: a problem family, algorithm settings and the seeds to run.
struct ExperimentConfig {
    EngineConfig engine;
    std::vector<std::uint64_t> seeds{0};
    int grid_size = 0; // points per dimension; 0 picks default_grid_size(D)
    std::string output_dir = "out";
    std::string name = "experiment";

    int resolved_grid_size() const;
};

/// Parse error carrying the 1-based line of the offending text (0 if unknown).
class ConfigParseError : public ConfigError {
public:
    ConfigParseError(const std::string& what, int line);
    int line() const { return line_; }

private:
    int line_;
};

/// Parses and validates a JSON config. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config with every default written out. Execution settings
/// (output_dir, modeling_workers) are left out so results do not depend on them.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

} // namespace apal
