#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "skyreserve/powerplant.hpp"
#include "skyreserve/predictor.hpp"
#include "skyreserve/simkit.hpp"

namespace skyreserve::config {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, int line)
        : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")"
                                      : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Resolved configuration for every subsystem. Defaults reproduce the
/// baseline aircraft, sector and training setup.
struct ProjectConfig {
    powerplant::AircraftConfig aircraft = powerplant::AircraftConfig::baseline();
    simkit::ScenarioConfig scenario;
    std::vector<int> densities = {10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
    predictor::NetConfig net;
    predictor::TrainConfig train;
};

ProjectConfig defaults();

/// Parse a sectioned key=value file over the defaults. Unknown sections or
/// keys and malformed values raise ConfigError with the offending line.
ProjectConfig load_file(const std::string& path);

/// Render a configuration as the same key=value text (round-trips through
/// load). Used for the shipped default config and the run manifest.
std::string to_text(const ProjectConfig& cfg);

}  // namespace skyreserve::config
