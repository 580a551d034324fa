#pragma once

// Time evolution of the mode state under a sampling policy.
//
// Increment rule, per step t → t′ with operator weights ω:
//   G_k += C_beta·(ω_k·λ_k)^p·(t′^q − t^q),   exposure_k += ω_k·(t′ − t).
// With ω constant this telescopes to the closed form g(ω_k·λ_k, t).
//
// Under TailModel::remainder the modes k > K share one progress value B
// (G_k = B·λ_k^p), driven by the operator weight of the last retained mode.
// Their loss is evaluated in closed form (reservoir_residual).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specdyn/samplers.hpp"
#include "specdyn/spectral_core.hpp"

namespace specdyn {

struct SimConfig {
    PowerLawSpectrum spec;
    TargetCoefficients targets;
    EvolutionKernel ek;
    SamplerPolicy policy;
    double t_start = 1e2;
    double t_end = 1e6;
    int steps_per_decade = 32;
    std::uint64_t seed = 0;
    TailModel tail = TailModel::remainder;
    /// Start integrating at the frontier onset time when it precedes t_start.
    bool warm_up = true;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct TrajectoryRecord {
    double t = 0.0;
    std::size_t k_star = 0;
    double loss = 0.0;           // Σ s_k e^{-2G_k} (+ reservoir)
    std::optional<double> C_t;   // oracle tail gain of the step ending at t
    double entropy = 0.0;
    double frontier_loss = 0.0;  // Σ_{k > k_star} s_k e^{-2G_k} (+ reservoir)
    double gain = 1.0;

    bool operator==(const TrajectoryRecord&) const = default;
};

struct Trajectory {
    std::string policy;
    std::size_t K = 0;
    std::vector<TrajectoryRecord> records;
    /// Set when the oracle ran out of modes; the records stop there.
    std::optional<double> completed_at;

    std::vector<double> times() const;
    std::vector<double> frontiers() const;
    std::vector<double> losses() const;
    std::vector<double> frontier_losses() const;
};

/// One step of the increment rule from state.t to t_next.
ModeState advance(const ModeState& state, double t_next, std::span<const double> omega,
                  const PowerLawSpectrum& spec, const EvolutionKernel& ek);

/// Σ_k s_k·e^{-2G_k} over the retained modes.
double loss_of(const ModeState& state, const TargetCoefficients& targets);

/// Σ_{k > K} s_k·e^{-2 B λ_k^p}, from the midpoint integral
/// (1/(a−1))·∫_0^V exp(−c·v^α) dv with V = (K+½)^{1−a}, c = 2B·C0^p,
/// α = b·p/(a−1), rescaled so that B = 0 gives the exact remainder.
double reservoir_residual(double B, const PowerLawSpectrum& spec, const TargetCoefficients& targets,
                          const EvolutionKernel& ek);

/// Integration times: the log-uniform grid on [t_start, t_end] with
/// round(decades·steps_per_decade) intervals, preceded by warm-up points
/// at the same ratio back to the frontier onset time.
std::vector<double> time_grid(const SimConfig& cfg);

Trajectory run(const SimConfig& cfg);

/// CSV with header t,k_star,loss,C_t,entropy,frontier_loss,gain.
std::string trajectory_csv(const Trajectory& traj);

std::string tail_model_name(TailModel tail);
TailModel parse_tail_model(const std::string& name);

}  // namespace specdyn
