#pragma once

// Experiment configuration documents: `key = value` lines, `#` comments,
// one optional `[name]` section header. Unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specdyn/samplers.hpp"

namespace specdyn {

enum class Mode { verify_exponent, simulate, compare, span_test };

std::string mode_name(Mode m);

/// Parse failure; `line` is 1-based, 0 when the error is not tied to a line.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ExperimentConfig {
    std::string name = "experiment";
    Mode mode = Mode::simulate;

    // model
    std::optional<double> a;
    std::optional<double> b;
    double C0 = 1.0;
    double p = 1.0;
    double q = 1.0;
    double kappa = 1.0;
    double C_beta = 1.0;
    std::string regime = "ntk";
    std::optional<std::size_t> K;

    // verify-exponent
    std::optional<std::size_t> n;
    std::size_t trials = 20;
    std::optional<std::pair<double, double>> cap;  // equal bounds for a fixed cap

    // simulate / compare
    std::optional<double> t_start;
    std::optional<double> t_end;
    int steps_per_decade = 32;
    std::vector<std::string> policies;
    std::optional<std::pair<double, double>> window;
    TailModel tail = TailModel::remainder;
    bool warm_up = true;
    std::optional<std::size_t> K0;
    std::optional<double> boost;
    double gamma = 1.0;
    double sharpness = 1.0;
    double probe_rate = 2.0;
    std::vector<double> teacher_rates{0.5, 1.0, 4.0};
    double mix = 0.5;
    std::optional<std::size_t> teacher_K;

    // span-test
    std::size_t d = 16;
    std::size_t m = 32;
    std::size_t student_rank = 4;
    std::size_t teacher_rank = 8;
    std::size_t self_count = 500;
    std::size_t teacher_count = 10;
    std::size_t span_trials = 10;

    std::uint64_t seed = 0;
    std::optional<std::string> output_dir;

    bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& policy_tags()
{
    static const std::vector<std::string> tags = {"uniform", "static",   "boost",          "oracle",
                                                  "probe",   "self-scoring", "ensemble", "synthetic-self",
                                                  "synthetic-teacher"};
    return tags;
}

/// Parses and validates; throws ConfigError.
ExperimentConfig parse_config(const std::string& text);

/// Throws ConfigError naming the offending key.
void validate_config(const ExperimentConfig& cfg);

/// Canonical document; parse_config(print_config(c)) == c.
std::string print_config(const ExperimentConfig& cfg);

}  // namespace specdyn
