#include "specdyn/outputs.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <stdexcept>

#include <openssl/evp.h>

#include "specdyn/text_io.hpp"

namespace specdyn {

namespace {

void refuse_existing(const std::filesystem::path& dir, bool overwrite)
{
    if (std::filesystem::exists(dir / kManifestName) && !overwrite) {
        throw std::runtime_error(dir.string() + " already holds a completed run (" + kManifestName
                                 + "); pass --overwrite to replace it");
    }
}

}  // namespace

std::string tool_version()
{
    return SPECDYN_VERSION;
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json RunManifest::to_json() const
{
    nlohmann::json files = nlohmann::json::array();
    for (const auto& o : outputs) files.push_back({{"file", o.file}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    return nlohmann::json{{"tool", kToolName},
                          {"version", version},
                          {"config", config_text},
                          {"started_at", started_at},
                          {"finished_at", finished_at},
                          {"outputs", files},
                          {"summary",
                           {{"passed", passed},
                            {"declared", declared},
                            {"all_passed", all_passed},
                            {"lines", summary}}}};
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                         const std::optional<std::filesystem::path>& cli_out)
{
    if (cli_out) return *cli_out;
    if (cfg.output_dir) return *cfg.output_dir;
    if (const char* root = std::getenv(kOutputEnv); root && *root) return std::filesystem::path(root) / cfg.name;
    return std::filesystem::path("specdyn_out") / cfg.name;
}

RunManifest emit_outputs(const ExperimentConfig& cfg, const SuiteResult& result, const std::filesystem::path& dir,
                         bool overwrite, const std::string& started_at)
{
    refuse_existing(dir, overwrite);
    std::filesystem::create_directories(dir);
    // A stale manifest must not vouch for a half-written rerun.
    std::filesystem::remove(dir / kManifestName);

    RunManifest man;
    man.config_text = print_config(cfg);
    man.version = tool_version();
    man.started_at = started_at;

    std::vector<OutputFile> files = result.files;
    files.push_back({"report.json", result.report.dump(2) + "\n"});
    files.push_back({"report.txt", result.report_text});
    for (const auto& f : files) {
        write_file_atomic(dir / f.name, f.content);
        man.outputs.push_back({f.name, sha256_hex(f.content), f.content.size()});
    }

    man.declared = result.declared_count();
    man.passed = result.passed_count();
    man.all_passed = result.all_passed();
    man.summary = result.summary;
    man.summary.push_back(std::to_string(man.passed) + "/" + std::to_string(man.declared)
                          + " declared tolerances pass");
    man.finished_at = utc_timestamp();
    write_file_atomic(dir / kManifestName, man.to_json().dump(2) + "\n");
    return man;
}

RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool overwrite,
                           SuiteResult* result_out)
{
    refuse_existing(dir, overwrite);
    const std::string started = utc_timestamp();
    SuiteResult result = run_suite(cfg);
    RunManifest man = emit_outputs(cfg, result, dir, overwrite, started);
    if (result_out) *result_out = std::move(result);
    return man;
}

}  // namespace specdyn
