// specdyn: run spectral-dynamics experiments from config files.
//
//   specdyn run <config> [--overwrite] [--out <dir>]
//   specdyn validate <config>
//   specdyn version
//
// Exit status: 0 when every declared tolerance passes, 1 when one fails,
// 2 on configuration or I/O errors.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "specdyn/config.hpp"
#include "specdyn/outputs.hpp"
#include "specdyn/text_io.hpp"

namespace {

specdyn::ExperimentConfig load(const std::string& path)
{
    return specdyn::parse_config(specdyn::read_file(path));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spectral dynamics of data curation: experiment runner", "specdyn"};
    app.require_subcommand(1);

    std::string config_path;
    bool overwrite = false;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "run an experiment config and write its outputs");
    run->add_option("config", config_path, "config file")->required();
    run->add_flag("--overwrite", overwrite, "replace a completed run in the output directory");
    run->add_option("--out", out_dir, "output directory (default: $SPECDYN_OUT/<name>)");

    auto* validate = app.add_subcommand("validate", "parse and validate a config without running it");
    validate->add_option("config", config_path, "config file")->required();

    app.add_subcommand("version", "print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("version")) {
            std::cout << specdyn::kToolName << ' ' << specdyn::tool_version() << '\n';
            return 0;
        }
        const specdyn::ExperimentConfig cfg = load(config_path);
        if (app.got_subcommand("validate")) {
            std::cout << specdyn::print_config(cfg);
            std::cerr << config_path << ": ok\n";
            return 0;
        }
        std::optional<std::filesystem::path> cli_out;
        if (!out_dir.empty()) cli_out = out_dir;
        const auto dir = specdyn::resolve_output_dir(cfg, cli_out);
        specdyn::SuiteResult result;
        const auto manifest = specdyn::run_experiment(cfg, dir, overwrite, &result);
        std::cout << result.report_text << '\n';
        for (const auto& line : manifest.summary) std::cout << line << '\n';
        std::cout << "outputs written to " << dir.string() << '\n';
        return manifest.all_passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "specdyn: " << e.what() << '\n';
        return 2;
    }
}
