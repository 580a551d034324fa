#pragma once

// Sampling policies over spectral modes. Each policy emits a mean-1 sampling
// distribution w over the K modes plus a scalar gain; the operator weights
// that enter the dynamics are gain·w.
//
// Two normalization classes exist. Sample-mass policies (Static,
// StaticBoost, Synthetic) have gain 1, i.e. ∫w dμ = 1. Spectral-mass
// policies (Oracle, OnlineProbe, SelfScoring, Ensemble) choose the gain so
// that Σ_k gain·w_k·λ_k equals the total spectral mass, which is the
// oracle's C(t)·Σλ = 1 normalization in trace units.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "specdyn/spectral_core.hpp"

namespace specdyn {

/// How the modes beyond the K retained ones are treated. `truncated` drops
/// them; `remainder` keeps them as one analytic reservoir (see dynamics.hpp)
/// whose eigenvalue mass enters the spectral normalization.
enum class TailModel { truncated, remainder };

struct Static {
    std::vector<double> weights;  // length K, nonnegative; rescaled to mean 1
};

/// Multiplies modes k ≤ K0 by `boost`, then mean-normalizes.
struct StaticBoost {
    std::size_t K0 = 0;
    double boost = 1.0;
};

/// Zero on learned modes (G_k ≥ kappa_ref), uniform on the rest.
struct Oracle {
    double kappa_ref = 1.0;
};

/// Weights ∝ (s_k·e^{-2 g_probe(λ_k, t)})^sharpness, where the probe is its
/// own kernel trained under uniform sampling.
struct OnlineProbe {
    EvolutionKernel probe_kernel;
    double sharpness = 1.0;
};

/// Weights ∝ (s_k·e^{-2 G_k})^gamma from the student's own residuals.
struct SelfScoring {
    double gamma = 1.0;
};

/// Uniform on the disagreement band (min frontier, max frontier]. Frontiers
/// come from fixed indices and from teacher kernels trained under uniform
/// sampling, evaluated at the current time. An empty band emits uniform.
struct Ensemble {
    std::vector<std::size_t> frontiers;
    std::vector<EvolutionKernel> teachers;
};

enum class SyntheticSource { self, teacher };

/// w = (1 − mix)·1 + mix·u, with u uniform (mean 1) over the modes the source
/// can represent: the learned set {G_k ≥ κ} for `self`, k ≤ teacher_K for
/// `teacher`. `self` with nothing learned emits the base weights.
struct Synthetic {
    SyntheticSource source = SyntheticSource::self;
    std::size_t teacher_K = 0;
    double mix = 0.5;
};

using SamplerPolicy =
    std::variant<Static, StaticBoost, Oracle, OnlineProbe, SelfScoring, Ensemble, Synthetic>;

Static uniform_policy(std::size_t K);

enum class Normalization { sample_mass, spectral_mass };

Normalization normalization_of(const SamplerPolicy& policy);

/// Short name used in file names and reports ("static", "oracle", …).
std::string policy_kind(const SamplerPolicy& policy);

/// Throws std::invalid_argument when the policy's parameters do not fit K.
void validate_policy(const SamplerPolicy& policy, std::size_t K);

/// Signals that the oracle has learned every retained mode.
class NothingLeftToLearn : public std::runtime_error {
public:
    explicit NothingLeftToLearn(std::size_t K);
};

struct OracleGain {
    std::size_t k_star = 0;
    double C_t = 0.0;  // 1 / Z_t
    double Z_t = 0.0;  // Σ_{k > k_star} λ_k
};

/// Tail renormalization at frontier k_star. With TailModel::remainder the
/// analytic mass Σ_{k>K} λ_k is part of Z_t.
OracleGain oracle_gain(const PowerLawSpectrum& spec, std::size_t k_star,
                       TailModel tail = TailModel::truncated);

struct SamplerContext {
    const PowerLawSpectrum& spec;
    const TargetCoefficients& targets;
    const EvolutionKernel& ek;
    TailModel tail = TailModel::truncated;
};

struct Sampling {
    std::vector<double> weights;  // mean 1
    double gain = 1.0;
    std::optional<OracleGain> oracle;
    double entropy = 0.0;  // Shannon entropy of weights/K, nats

    std::vector<double> operator_weights() const;
};

/// Evaluates `policy` at `state`. Throws NothingLeftToLearn for the oracle
/// once every retained mode is learned.
Sampling weights_at(const SamplerPolicy& policy, const SamplerContext& ctx, const ModeState& state);

/// Elementwise w_k·λ_k.
std::vector<double> effective_lambda(std::span<const double> weights, const PowerLawSpectrum& spec);

double weight_entropy(std::span<const double> w);

}  // namespace specdyn
