#pragma once

// Command-line front end: simulate, hysteresis, fit, process.
//
// Settings are resolved as preset < --config JSON file < command-line flags.
// The fully resolved RunConfig is written next to the outputs and embedded as
// a `# run_config {...}` comment in every output file, so a run can be
// repeated with `--config <out>/run_config.json`.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibro/model.hpp"

namespace vibro::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string preset = "steel";
    std::string scenario = "idle-impulse";

    // physical parameters (defaults come from the preset)
    double k = 0, alpha = 0, n = 0, xc = 0, b = 0, m2 = 0, v_platform = 0;

    // scenario
    double v2 = 1.0;    ///< idle-impulse launch speed; the body is always sent toward the wall
    double gap = 0;     ///< initial distance in front of the wall [m]
    double t_end = 0;
    double sample_rate = kPresetSampleRate;

    // integrator
    double dt = 2e-5;
    double tol_event = 1e-9;
    int event_cap = 8;  ///< events allowed inside one integrator step

    // signal processing
    double fc = 200.0;
    double noise = 0.0;  ///< std of Gaussian noise on the exported measurement [m]
    std::uint64_t seed = 0;

    // hysteresis
    std::string alphas = "0.1,1";
    double amplitude = 1e-3;
    double freq = 10.0;
    double decay = 2.0;
    int cycles = 4;
    int samples_per_cycle = 2000;

    // fit
    std::string input;
    std::string free = "k,alpha";
    std::string bounds;
    int max_evals = 2000;
    int starts = 5;
    int profile_grid = 0;

    std::string out = ".";

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] SystemParams params() const;
};

/// Resolves a command's configuration from a merged flat key-value object.
RunConfig resolve(const std::string& command, const nlohmann::json& merged);

/// Executes one command; returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full entry point: argument parsing, config merging and execution.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vibro::cli
