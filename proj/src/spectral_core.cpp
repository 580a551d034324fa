#include "specdyn/spectral_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace specdyn {

namespace {

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

}  // namespace

double power_tail_sum(double s, std::size_t first)
{
    if (!(s > 1.0) || !std::isfinite(s)) {
        throw std::invalid_argument("power_tail_sum: exponent must be > 1");
    }
    if (first == 0) {
        throw std::invalid_argument("power_tail_sum: first index must be >= 1");
    }
    constexpr std::size_t direct_until = 16;
    double head = 0.0;
    std::size_t n = first;
    for (; n < direct_until; ++n) {
        head += std::pow(static_cast<double>(n), -s);
    }

    // Euler–Maclaurin from n: ∫ + f(n)/2 + Σ_j B_2j/(2j)!·s(s+1)…(s+2j-2)·n^{-s-2j+1}
    static constexpr std::array<double, 5> bernoulli_over_factorial = {
        1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0};
    const double N = static_cast<double>(n);
    double tail = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
    double rising = s;
    double npow = std::pow(N, -s - 1.0);
    for (std::size_t j = 0; j < bernoulli_over_factorial.size(); ++j) {
        tail += bernoulli_over_factorial[j] * rising * npow;
        const double m = s + 2.0 * static_cast<double>(j);
        rising *= (m + 1.0) * (m + 2.0);
        npow /= N * N;
    }
    return head + tail;
}

PowerLawSpectrum::PowerLawSpectrum(double b, double C0, std::size_t K) : b_(b), C0_(C0)
{
    require_finite(b, "b");
    require_finite(C0, "C0");
    if (!(b > 1.0)) {
        throw std::invalid_argument("b must be > 1 (tail sum diverges otherwise)");
    }
    if (!(C0 > 0.0)) {
        throw std::invalid_argument("C0 must be > 0");
    }
    if (K < 2) {
        throw std::invalid_argument("K must be >= 2");
    }
    lambdas_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        lambdas_[k] = C0 * std::pow(static_cast<double>(k + 1), -b);
    }
    // Smallest terms first.
    retained_mass_ = 0.0;
    for (auto it = lambdas_.rbegin(); it != lambdas_.rend(); ++it) {
        retained_mass_ += *it;
    }
    remainder_mass_ = C0 * power_tail_sum(b, K + 1);
}

PowerLawSpectrum make_spectrum(double b, double C0, std::size_t K)
{
    return PowerLawSpectrum(b, C0, K);
}

TargetCoefficients::TargetCoefficients(double a, std::size_t K) : a_(a)
{
    require_finite(a, "a");
    if (!(a > 1.0)) {
        throw std::invalid_argument("a must be > 1");
    }
    if (K < 2) {
        throw std::invalid_argument("K must be >= 2");
    }
    s_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        s_[k] = std::pow(static_cast<double>(k + 1), -a);
    }
    initial_loss_ = 0.0;
    for (auto it = s_.rbegin(); it != s_.rend(); ++it) {
        initial_loss_ += *it;
    }
    remainder_loss_ = power_tail_sum(a, K + 1);
}

TargetCoefficients make_targets(double a, std::size_t K)
{
    return TargetCoefficients(a, K);
}

void EvolutionKernel::validate() const
{
    require_finite(C_beta, "C_beta");
    require_finite(p, "p");
    require_finite(q, "q");
    require_finite(kappa, "kappa");
    if (!(C_beta > 0.0)) throw std::invalid_argument("C_beta must be > 0");
    if (!(p > 0.0)) throw std::invalid_argument("p must be > 0");
    if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
}

ModeState ModeState::initial(std::size_t K)
{
    ModeState st;
    st.G.assign(K, 0.0);
    st.exposure.assign(K, 0.0);
    return st;
}

double evolution_progress(const EvolutionKernel& ek, double lambda, double t)
{
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("evolution_progress: lambda must be > 0");
    }
    if (!(t >= 0.0)) {
        throw std::invalid_argument("evolution_progress: t must be >= 0");
    }
    if (t == 0.0) {
        return 0.0;
    }
    return ek.C_beta * std::pow(lambda, ek.p) * std::pow(t, ek.q);
}

std::size_t frontier_index(const EvolutionKernel& ek, const PowerLawSpectrum& spec, double t)
{
    if (!(t >= 0.0)) {
        throw std::invalid_argument("frontier_index: t must be >= 0");
    }
    // g(λ_k, t) is decreasing in k, so the learned modes form a prefix.
    const auto lambdas = spec.lambdas();
    auto first_unlearned = std::partition_point(
        lambdas.begin(), lambdas.end(),
        [&](double lambda) { return reaches_threshold(evolution_progress(ek, lambda, t), ek.kappa); });
    return static_cast<std::size_t>(first_unlearned - lambdas.begin());
}

std::size_t learned_frontier(std::span<const double> G, double kappa)
{
    for (std::size_t i = G.size(); i > 0; --i) {
        if (reaches_threshold(G[i - 1], kappa)) {
            return i;
        }
    }
    return 0;
}

double static_loss(const EvolutionKernel& ek, const PowerLawSpectrum& spec,
                   const TargetCoefficients& tc, double t)
{
    if (spec.size() != tc.size()) {
        throw std::invalid_argument("static_loss: spectrum and targets differ in K");
    }
    double loss = 0.0;
    for (std::size_t i = spec.size(); i > 0; --i) {
        loss += tc[i - 1] * std::exp(-2.0 * evolution_progress(ek, spec[i - 1], t));
    }
    return loss;
}

}  // namespace specdyn
