#pragma once

// Mode dispatch: turns an ExperimentConfig into computed results (checks,
// CSV payloads and the report), without touching the filesystem.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specdyn/config.hpp"
#include "specdyn/dynamics.hpp"
#include "specdyn/measurement.hpp"

namespace specdyn {

struct OutputFile {
    std::string name;
    std::string content;
};

struct SuiteResult {
    Mode mode = Mode::simulate;
    std::vector<Check> checks;
    std::vector<OutputFile> files;  // data files; report files are added on emit
    nlohmann::json report;
    std::string report_text;
    std::vector<std::string> summary;  // one line per declared check family

    bool all_passed() const;
    std::size_t declared_count() const;
    std::size_t passed_count() const;
};

/// Builds the policy named by `tag` from the config's parameters.
SamplerPolicy make_policy(const std::string& tag, const ExperimentConfig& cfg, std::size_t K);

/// SimConfig for one policy of a simulate/compare config.
SimConfig sim_config(const ExperimentConfig& cfg, const std::string& tag);

nlohmann::json sim_config_json(const SimConfig& sc);
nlohmann::json trajectory_json(const Trajectory& traj, const SimConfig& sc);
nlohmann::json report_json(const ExponentReport& rep);

SuiteResult run_suite(const ExperimentConfig& cfg);

}  // namespace specdyn
