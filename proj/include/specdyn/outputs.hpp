#pragma once

// Writing results to disk: data files, report.json, report.txt and, last,
// manifest.json. A directory holding a manifest is a completed run.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specdyn/config.hpp"
#include "specdyn/suite.hpp"

namespace specdyn {

inline constexpr const char* kToolName = "specdyn";
inline constexpr const char* kOutputEnv = "SPECDYN_OUT";
inline constexpr const char* kManifestName = "manifest.json";

std::string tool_version();

struct OutputChecksum {
    std::string file;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string config_text;  // print_config of the run
    std::string version;
    std::string started_at;
    std::string finished_at;
    std::vector<OutputChecksum> outputs;
    std::size_t passed = 0;
    std::size_t declared = 0;
    bool all_passed = false;
    std::vector<std::string> summary;

    nlohmann::json to_json() const;
};

std::string sha256_hex(const std::string& bytes);

/// --out, then the config's output_dir, then $SPECDYN_OUT/<name>, then
/// specdyn_out/<name>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                         const std::optional<std::filesystem::path>& cli_out);

/// Throws std::runtime_error if `dir` already holds a manifest and
/// `overwrite` is false.
RunManifest emit_outputs(const ExperimentConfig& cfg, const SuiteResult& result, const std::filesystem::path& dir,
                         bool overwrite, const std::string& started_at);

/// Checks the output directory, runs the suite and emits everything.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool overwrite,
                           SuiteResult* result_out = nullptr);

std::string utc_timestamp();

}  // namespace specdyn
