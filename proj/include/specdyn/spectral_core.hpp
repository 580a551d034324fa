#pragma once

// Idealized mode-space model: power-law spectra, per-mode target weights,
// the progress map g(λ, t) = C·λ^p·t^q and the learning frontier.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace specdyn {

/// Σ_{k ≥ first} k^{-s} for s > 1 and first ≥ 1.
///
/// The first few terms are summed directly; the rest uses Euler–Maclaurin,
/// accurate to ~1e-14 relative.
double power_tail_sum(double s, std::size_t first);

/// Eigenvalue sequence λ_k = C0·k^{-b}, k = 1..K (stored 0-based).
class PowerLawSpectrum {
public:
    PowerLawSpectrum(double b, double C0, std::size_t K);

    double b() const noexcept { return b_; }
    double C0() const noexcept { return C0_; }
    std::size_t size() const noexcept { return lambdas_.size(); }

    std::span<const double> lambdas() const noexcept { return lambdas_; }
    double operator[](std::size_t i) const { return lambdas_[i]; }

    /// Σ_{k ≤ K} λ_k.
    double retained_mass() const noexcept { return retained_mass_; }
    /// Σ_{k > K} λ_k, the analytic remainder the truncation drops.
    double remainder_mass() const noexcept { return remainder_mass_; }

    bool operator==(const PowerLawSpectrum&) const = default;

private:
    double b_;
    double C0_;
    std::vector<double> lambdas_;
    double retained_mass_;
    double remainder_mass_;
};

PowerLawSpectrum make_spectrum(double b, double C0, std::size_t K);

/// Per-mode loss weights s_k = k^{-a}; houses the product λ_k w_k².
class TargetCoefficients {
public:
    TargetCoefficients(double a, std::size_t K);

    double a() const noexcept { return a_; }
    std::size_t size() const noexcept { return s_.size(); }
    std::span<const double> s() const noexcept { return s_; }
    double operator[](std::size_t i) const { return s_[i]; }

    /// L(0) of the truncated model, Σ_{k ≤ K} s_k.
    double initial_loss() const noexcept { return initial_loss_; }
    /// Σ_{k > K} s_k.
    double remainder_loss() const noexcept { return remainder_loss_; }

    bool operator==(const TargetCoefficients&) const = default;

private:
    double a_;
    std::vector<double> s_;
    double initial_loss_;
    double remainder_loss_;
};

TargetCoefficients make_targets(double a, std::size_t K);

/// g(λ, t) = C_beta·λ^p·t^q with learning threshold kappa.
struct EvolutionKernel {
    double C_beta = 1.0;
    double p = 1.0;
    double q = 1.0;
    double kappa = 1.0;
    std::string regime_label = "ntk";

    /// Frontier exponent ρ = q/p (λ⋆(t) ∝ t^{-ρ}).
    double rho() const noexcept { return q / p; }

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    bool operator==(const EvolutionKernel&) const = default;
};

/// Accumulated per-mode progress. G_k generalizes g(λ_k, t) to time-varying
/// sampling; `tail_progress` is the shared progress B of the unresolved
/// modes k > K, which have G_k = B·λ_k^p.
struct ModeState {
    std::vector<double> G;
    std::vector<double> exposure;
    double t = 0.0;
    double tail_progress = 0.0;

    static ModeState initial(std::size_t K);

    bool operator==(const ModeState&) const = default;
};

double evolution_progress(const EvolutionKernel& ek, double lambda, double t);

/// Largest 1-based k with g(λ_k, t) ≥ κ, or 0 when no mode qualifies.
std::size_t frontier_index(const EvolutionKernel& ek, const PowerLawSpectrum& spec, double t);

/// Largest 1-based k with G_k ≥ kappa in an evolved state (0 when none).
std::size_t learned_frontier(std::span<const double> G, double kappa);

/// L(t) = Σ_k s_k·exp(-2 g(λ_k, t)) under uniform sampling.
double static_loss(const EvolutionKernel& ek, const PowerLawSpectrum& spec,
                   const TargetCoefficients& tc, double t);

/// Comparison used for "g ≥ κ": ties, including ones blurred by the last ulp
/// of the power evaluations, count as learned.
inline bool reaches_threshold(double g, double kappa) noexcept
{
    return g >= kappa * (1.0 - 1e-12);
}

}  // namespace specdyn
