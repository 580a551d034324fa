#include "specdyn/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace specdyn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_size(const ModeState& state, std::size_t K)
{
    if (state.G.size() != K) {
        throw std::invalid_argument("weights_at: state has " + std::to_string(state.G.size())
                                    + " modes, spectrum has " + std::to_string(K));
    }
}

/// Rescales nonnegative raw scores to mean 1.
std::vector<double> mean_one(std::vector<double> raw)
{
    double sum = 0.0;
    for (double v : raw) sum += v;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw std::invalid_argument("sampler produced all-zero or non-finite raw weights");
    }
    const double scale = static_cast<double>(raw.size()) / sum;
    for (double& v : raw) v *= scale;
    return raw;
}

/// exp(log_score − max) keeps the largest score at 1, so sharp scores never
/// underflow to an all-zero vector.
std::vector<double> from_log_scores(std::vector<double> log_score)
{
    const double top = *std::max_element(log_score.begin(), log_score.end());
    for (double& v : log_score) v = std::exp(v - top);
    return mean_one(std::move(log_score));
}

double spectral_unit(const SamplerContext& ctx)
{
    double unit = ctx.spec.retained_mass();
    if (ctx.tail == TailModel::remainder) unit += ctx.spec.remainder_mass();
    return unit;
}

/// Gain that makes Σ gain·w_k·λ_k (+ gain·w_K·R) equal the total mass.
double spectral_gain(const std::vector<double>& w, const SamplerContext& ctx)
{
    double mass = 0.0;
    for (std::size_t i = w.size(); i > 0; --i) mass += w[i - 1] * ctx.spec[i - 1];
    if (ctx.tail == TailModel::remainder) mass += w.back() * ctx.spec.remainder_mass();
    if (!(mass > 0.0)) {
        throw std::invalid_argument("sampler weights carry no spectral mass");
    }
    return spectral_unit(ctx) / mass;
}

double log_residual(const TargetCoefficients& tc, std::size_t i, double G)
{
    return std::log(tc[i]) - 2.0 * G;
}

}  // namespace

Static uniform_policy(std::size_t K)
{
    return Static{std::vector<double>(K, 1.0)};
}

Normalization normalization_of(const SamplerPolicy& policy)
{
    return std::visit(overloaded{
                          [](const Static&) { return Normalization::sample_mass; },
                          [](const StaticBoost&) { return Normalization::sample_mass; },
                          [](const Synthetic&) { return Normalization::sample_mass; },
                          [](const auto&) { return Normalization::spectral_mass; },
                      },
                      policy);
}

std::string policy_kind(const SamplerPolicy& policy)
{
    return std::visit(overloaded{
                          [](const Static&) { return std::string("static"); },
                          [](const StaticBoost&) { return std::string("boost"); },
                          [](const Oracle&) { return std::string("oracle"); },
                          [](const OnlineProbe&) { return std::string("probe"); },
                          [](const SelfScoring&) { return std::string("self-scoring"); },
                          [](const Ensemble&) { return std::string("ensemble"); },
                          [](const Synthetic& s) {
                              return std::string(s.source == SyntheticSource::self ? "synthetic-self"
                                                                                   : "synthetic-teacher");
                          },
                      },
                      policy);
}

void validate_policy(const SamplerPolicy& policy, std::size_t K)
{
    std::visit(overloaded{
                   [&](const Static& p) {
                       if (p.weights.size() != K) {
                           throw std::invalid_argument("Static: weight vector length differs from K");
                       }
                       double sum = 0.0;
                       for (double v : p.weights) {
                           if (!(v >= 0.0) || !std::isfinite(v)) {
                               throw std::invalid_argument("Static: weights must be finite and >= 0");
                           }
                           sum += v;
                       }
                       if (!(sum > 0.0)) throw std::invalid_argument("Static: weights are all zero");
                   },
                   [&](const StaticBoost& p) {
                       if (p.K0 < 1 || p.K0 > K) throw std::invalid_argument("StaticBoost: K0 must be in [1, K]");
                       if (!(p.boost > 1.0) || !std::isfinite(p.boost)) {
                           throw std::invalid_argument("StaticBoost: boost must be > 1");
                       }
                   },
                   [&](const Oracle& p) {
                       if (!(p.kappa_ref > 0.0) || !std::isfinite(p.kappa_ref)) {
                           throw std::invalid_argument("Oracle: kappa_ref must be > 0");
                       }
                   },
                   [&](const OnlineProbe& p) {
                       p.probe_kernel.validate();
                       if (!(p.sharpness >= 0.0) || !std::isfinite(p.sharpness)) {
                           throw std::invalid_argument("OnlineProbe: sharpness must be >= 0");
                       }
                   },
                   [&](const SelfScoring& p) {
                       if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) {
                           throw std::invalid_argument("SelfScoring: gamma must be >= 0");
                       }
                   },
                   [&](const Ensemble& p) {
                       if (p.frontiers.size() + p.teachers.size() < 2) {
                           throw std::invalid_argument("Ensemble: needs at least two teachers");
                       }
                       for (std::size_t f : p.frontiers) {
                           if (f > K) throw std::invalid_argument("Ensemble: frontier index exceeds K");
                       }
                       for (const auto& ek : p.teachers) ek.validate();
                   },
                   [&](const Synthetic& p) {
                       if (!(p.mix >= 0.0 && p.mix <= 1.0)) {
                           throw std::invalid_argument("Synthetic: mix must be in [0, 1]");
                       }
                       if (p.source == SyntheticSource::teacher && (p.teacher_K < 1 || p.teacher_K > K)) {
                           throw std::invalid_argument("Synthetic: teacher_K must be in [1, K]");
                       }
                   },
               },
               policy);
}

NothingLeftToLearn::NothingLeftToLearn(std::size_t K)
    : std::runtime_error("nothing left to learn: all " + std::to_string(K) + " modes are learned")
{
}

OracleGain oracle_gain(const PowerLawSpectrum& spec, std::size_t k_star, TailModel tail)
{
    const std::size_t K = spec.size();
    if (k_star > K) {
        throw std::invalid_argument("oracle_gain: k_star exceeds K");
    }
    if (k_star == K) {
        throw NothingLeftToLearn(K);
    }
    double Z = tail == TailModel::remainder ? spec.remainder_mass() : 0.0;
    for (std::size_t i = K; i > k_star; --i) Z += spec[i - 1];
    return OracleGain{k_star, 1.0 / Z, Z};
}

std::vector<double> Sampling::operator_weights() const
{
    std::vector<double> out(weights);
    for (double& v : out) v *= gain;
    return out;
}

double weight_entropy(std::span<const double> w)
{
    double sum = 0.0;
    for (double v : w) sum += v;
    if (!(sum > 0.0)) return 0.0;
    double h = 0.0;
    for (double v : w) {
        if (v > 0.0) {
            const double p = v / sum;
            h -= p * std::log(p);
        }
    }
    return h;
}

Sampling weights_at(const SamplerPolicy& policy, const SamplerContext& ctx, const ModeState& state)
{
    const std::size_t K = ctx.spec.size();
    require_size(state, K);
    if (ctx.targets.size() != K) {
        throw std::invalid_argument("weights_at: targets and spectrum differ in K");
    }

    Sampling out;
    std::visit(
        overloaded{
            [&](const Static& p) {
                if (p.weights.size() != K) {
                    throw std::invalid_argument("Static: weight vector length differs from K");
                }
                out.weights = mean_one(p.weights);
            },
            [&](const StaticBoost& p) {
                validate_policy(p, K);
                std::vector<double> raw(K, 1.0);
                std::fill(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(p.K0), p.boost);
                out.weights = mean_one(std::move(raw));
            },
            [&](const Oracle& p) {
                const std::size_t k_star = learned_frontier(state.G, p.kappa_ref);
                const OracleGain og = oracle_gain(ctx.spec, k_star, ctx.tail);
                out.weights.assign(K, 0.0);
                const double level = static_cast<double>(K) / static_cast<double>(K - k_star);
                std::fill(out.weights.begin() + static_cast<std::ptrdiff_t>(k_star), out.weights.end(), level);
                // Operator weight on the tail is C_t·(total mass), i.e. C_t in trace units.
                out.gain = og.C_t * spectral_unit(ctx) / level;
                out.oracle = og;
            },
            [&](const OnlineProbe& p) {
                std::vector<double> ls(K);
                for (std::size_t i = 0; i < K; ++i) {
                    const double g = evolution_progress(p.probe_kernel, ctx.spec[i], state.t);
                    ls[i] = p.sharpness * log_residual(ctx.targets, i, g);
                }
                out.weights = from_log_scores(std::move(ls));
            },
            [&](const SelfScoring& p) {
                std::vector<double> ls(K);
                for (std::size_t i = 0; i < K; ++i) ls[i] = p.gamma * log_residual(ctx.targets, i, state.G[i]);
                out.weights = from_log_scores(std::move(ls));
            },
            [&](const Ensemble& p) {
                std::size_t lo = std::numeric_limits<std::size_t>::max();
                std::size_t hi = 0;
                auto take = [&](std::size_t f) {
                    lo = std::min(lo, f);
                    hi = std::max(hi, f);
                };
                for (std::size_t f : p.frontiers) take(std::min(f, K));
                for (const auto& teacher : p.teachers) take(frontier_index(teacher, ctx.spec, state.t));
                if (hi <= lo) {
                    out.weights.assign(K, 1.0);
                    return;
                }
                std::vector<double> raw(K, 0.0);
                std::fill(raw.begin() + static_cast<std::ptrdiff_t>(lo), raw.begin() + static_cast<std::ptrdiff_t>(hi),
                          1.0);
                out.weights = mean_one(std::move(raw));
            },
            [&](const Synthetic& p) {
                std::vector<double> support(K, 0.0);
                if (p.source == SyntheticSource::self) {
                    for (std::size_t i = 0; i < K; ++i) {
                        if (reaches_threshold(state.G[i], ctx.ek.kappa)) support[i] = 1.0;
                    }
                } else {
                    validate_policy(p, K);
                    std::fill(support.begin(), support.begin() + static_cast<std::ptrdiff_t>(p.teacher_K), 1.0);
                }
                double count = 0.0;
                for (double v : support) count += v;
                if (count == 0.0) {
                    out.weights.assign(K, 1.0);
                    return;
                }
                const double level = static_cast<double>(K) / count;
                std::vector<double> w(K);
                for (std::size_t i = 0; i < K; ++i) w[i] = (1.0 - p.mix) + p.mix * level * support[i];
                out.weights = std::move(w);
            },
        },
        policy);

    if (normalization_of(policy) == Normalization::spectral_mass && !out.oracle) {
        out.gain = spectral_gain(out.weights, ctx);
    }
    out.entropy = weight_entropy(out.weights);
    return out;
}

std::vector<double> effective_lambda(std::span<const double> weights, const PowerLawSpectrum& spec)
{
    if (weights.size() != spec.size()) {
        throw std::invalid_argument("effective_lambda: length mismatch");
    }
    std::vector<double> out(weights.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = weights[i] * spec[i];
    return out;
}

}  // namespace specdyn
