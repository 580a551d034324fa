#pragma once

// Log-log least-squares exponent fits and the exponent report comparing
// policies against the analytic predictions.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specdyn/dynamics.hpp"

namespace specdyn {

struct Window {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept
    {
        return x >= lo * (1.0 - 1e-9) && x <= hi * (1.0 + 1e-9);
    }
    bool operator==(const Window&) const = default;
};

/// y ≈ exp(log_prefactor)·x^{-exponent}; decaying data give exponent > 0.
struct PowerLawFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double stderr_ = 0.0;  // standard error of the slope
    Window window;
    double r_squared = 0.0;
    std::size_t points = 0;
};

inline constexpr std::size_t kMinFitPoints = 8;

/// OLS on (log x, log y) over points with x inside `window`.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys, Window window);

/// Eigen-tail fit over 1-based indices k in [lo, hi]; zero values are skipped.
PowerLawFit fit_spectrum_tail(std::span<const double> values, std::size_t lo, std::size_t hi);

struct TrajectoryFits {
    PowerLawFit frontier;  // growth exponent: k⋆ ∝ t^{frontier.exponent}
    PowerLawFit loss;      // decay exponent of the frontier loss
    std::optional<PowerLawFit> exact_loss;  // decay exponent of the exact loss, when fittable
};

/// Requires a window of ≥ 2 decades covered by records, and 1 ≤ k⋆ < K
/// throughout it.
TrajectoryFits trajectory_exponents(const Trajectory& traj, Window window);

/// Times where 1 ≤ k⋆ < K in every trajectory; nullopt when they share none.
std::optional<Window> common_unsaturated_span(std::span<const Trajectory* const> trajs);

/// Middle two decades of a span (geometric centre ± one decade).
Window middle_two_decades(Window span);
/// Last two decades of a span.
Window last_two_decades(Window span);

struct ModelParams {
    double a = 2.0;
    double b = 2.0;
    double p = 1.0;
    double q = 1.0;
};

struct Predictions {
    double rho = 0.0;
    double static_frontier = 0.0;  // ρ/b
    double oracle_frontier = 0.0;  // ρ
    double static_loss = 0.0;      // (a−1)ρ/b
    double oracle_loss = 0.0;      // aρ/b
};

Predictions predictions(const ModelParams& params);

struct Tolerances {
    double frontier = 0.05;
    double loss = 0.10;
    double ordering = 0.05;
    double boost_ratio = 1.05;
    double crossover = 0.05;
};

/// One pass/fail line. Only `declared` checks decide the exit status.
struct Check {
    std::string name;
    std::string criterion;  // e.g. "|fit - 0.5| <= 0.05"
    double value = 0.0;
    bool passed = false;
    bool declared = true;
};

struct PolicyReport {
    std::string policy;
    TrajectoryFits fits;
    std::optional<double> predicted_frontier;
    std::optional<double> predicted_loss;
    std::size_t final_k_star = 0;
    std::optional<double> completed_at;
};

struct BoostDiagnostics {
    std::size_t K0 = 0;
    double min_ratio_inside = 0.0;  // min k⋆_boost/k⋆_uniform while k⋆_boost < K0
    std::size_t inside_points = 0;
    Window late_window;
    double late_exponent_boost = 0.0;
    double late_exponent_uniform = 0.0;
    double late_ratio_limit = 0.0;
    std::optional<double> crossover_time;
};

struct ExponentReport {
    ModelParams params;
    Predictions predictions;
    Tolerances tolerances;
    Window window;
    std::map<std::string, PolicyReport> policies;
    std::optional<BoostDiagnostics> boost;
    std::vector<Check> checks;

    bool all_passed() const;
};

struct ReportOptions {
    std::optional<Window> window;  // default: middle two decades of the common unsaturated span
    Tolerances tolerances;
    std::size_t boost_K0 = 0;      // used when a "boost" trajectory is present
};

/// Fits every trajectory on one window and adds the checks that the present
/// policies allow: predictions for "uniform" and "oracle", oracle loss
/// dominance, boost finite-region behaviour, synthetic-self confinement and
/// paradigm ordering.
ExponentReport build_report(const std::map<std::string, Trajectory>& trajs, const ModelParams& params,
                            const ReportOptions& options = {});

/// Aligned text table of fits and checks.
std::string report_text(const ExponentReport& report);

}  // namespace specdyn
