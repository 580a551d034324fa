#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "specdyn/samplers.hpp"

using namespace specdyn;

namespace {

constexpr double kInvTailFrom11To1000 = 10.6194499850268971;  // 1/Σ_{k=11}^{1000} k^-2
constexpr double kCtTruncatedMillion = 0.607927471429427684;  // 1/Σ_{k=1}^{1e6} k^-2
constexpr double kSixOverPiSq = 0.607927101854026629;

struct Model {
    PowerLawSpectrum spec;
    TargetCoefficients targets;
    EvolutionKernel ek;

    Model(std::size_t K, double a = 2.0, double b = 2.0) : spec(make_spectrum(b, 1.0, K)), targets(make_targets(a, K)) {}
    SamplerContext ctx(TailModel tail = TailModel::truncated) const { return {spec, targets, ek, tail}; }
};

double mean(const std::vector<double>& w)
{
    return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

double operator_mass(const Sampling& s, const PowerLawSpectrum& spec)
{
    const auto omega = s.operator_weights();
    double m = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) m += omega[i] * spec[i];
    return m;
}

ModeState learned_prefix(std::size_t K, std::size_t learned, double G_learned = 50.0)
{
    auto st = ModeState::initial(K);
    for (std::size_t i = 0; i < learned; ++i) st.G[i] = G_learned;
    return st;
}

}  // namespace

TEST_CASE("oracle_gain tail sums")
{
    const auto s = make_spectrum(2.0, 1.0, 1000);
    const auto og = oracle_gain(s, 10);
    CHECK(og.C_t == doctest::Approx(kInvTailFrom11To1000).epsilon(1e-13));
    CHECK(og.Z_t * og.C_t == doctest::Approx(1.0).epsilon(1e-15));
    // Asymptotic scale (k⋆)^{b−1} = 10.
    CHECK(std::abs(og.C_t - 10.0) < 1.0);

    CHECK(oracle_gain(s, 999).C_t == doctest::Approx(1.0 / s[999]).epsilon(1e-14));
    CHECK_THROWS_AS(oracle_gain(s, 1000), NothingLeftToLearn);
    CHECK_THROWS_AS(oracle_gain(s, 1001), std::invalid_argument);

    const auto big = make_spectrum(2.0, 1.0, 1000000);
    const double ct = oracle_gain(big, 0).C_t;
    CHECK(ct == doctest::Approx(kCtTruncatedMillion).epsilon(1e-12));
    CHECK(std::abs(ct - kSixOverPiSq) < 1e-5);
    CHECK(oracle_gain(big, 0, TailModel::remainder).C_t == doctest::Approx(kSixOverPiSq).epsilon(1e-12));
}

TEST_CASE("oracle emits uniform weights before anything is learned")
{
    Model m(100);
    const auto s = weights_at(Oracle{1.0}, m.ctx(), ModeState::initial(100));
    for (double w : s.weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(s.oracle);
    CHECK(s.oracle->k_star == 0);
}

TEST_CASE("oracle zeroes learned modes and renormalizes the tail")
{
    Model m(1000);
    const auto s = weights_at(Oracle{1.0}, m.ctx(), learned_prefix(1000, 10));
    for (std::size_t i = 0; i < 10; ++i) CHECK(s.weights[i] == 0.0);
    CHECK(mean(s.weights) == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(s.oracle);
    CHECK(s.oracle->k_star == 10);
    CHECK(s.oracle->C_t == doctest::Approx(kInvTailFrom11To1000).epsilon(1e-13));

    // Effective tail eigenvalues are C_t·λ_k in trace units.
    const auto eff = effective_lambda(s.operator_weights(), m.spec);
    const double unit = m.spec.retained_mass();
    CHECK(eff[10] == doctest::Approx(s.oracle->C_t * unit / 121.0).epsilon(1e-13));
    CHECK(eff[500] / eff[10] == doctest::Approx(m.spec[500] / m.spec[10]).epsilon(1e-13));
    CHECK(operator_mass(s, m.spec) == doctest::Approx(unit).epsilon(1e-13));

    CHECK_THROWS_AS(weights_at(Oracle{1.0}, m.ctx(), learned_prefix(1000, 1000)), NothingLeftToLearn);
}

TEST_CASE("static policy is time invariant and has unit gain")
{
    Model m(50);
    std::vector<double> raw(50);
    for (std::size_t i = 0; i < 50; ++i) raw[i] = 1.0 + static_cast<double>(i % 3);
    const Static pol{raw};
    auto later = learned_prefix(50, 20);
    later.t = 1e5;
    const auto a = weights_at(pol, m.ctx(), ModeState::initial(50));
    const auto b = weights_at(pol, m.ctx(), later);
    CHECK(a.weights == b.weights);
    CHECK(a.gain == 1.0);
    CHECK(mean(a.weights) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normalization_of(pol) == Normalization::sample_mass);

    const auto u = weights_at(uniform_policy(50), m.ctx(), later);
    CHECK(effective_lambda(u.operator_weights(), m.spec) == std::vector<double>(m.spec.lambdas().begin(),
                                                                                  m.spec.lambdas().end()));
}

TEST_CASE("boost raises the first K0 modes")
{
    Model m(100);
    const auto s = weights_at(StaticBoost{10, 4.0}, m.ctx(), ModeState::initial(100));
    CHECK(s.weights[0] / s.weights[50] == doctest::Approx(4.0));
    CHECK(mean(s.weights) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(validate_policy(StaticBoost{0, 4.0}, 100), std::invalid_argument);
    CHECK_THROWS_AS(validate_policy(StaticBoost{101, 4.0}, 100), std::invalid_argument);
    CHECK_THROWS_AS(validate_policy(StaticBoost{10, 0.5}, 100), std::invalid_argument);
}

TEST_CASE("self scoring suppresses learned modes")
{
    Model m(40);
    const auto s = weights_at(SelfScoring{1.0}, m.ctx(), learned_prefix(40, 5));
    for (std::size_t i = 0; i < 5; ++i) CHECK(s.weights[i] < 1e-30);
    // Beyond the learned block the weights follow s_k.
    for (std::size_t i = 6; i < 40; ++i)
        CHECK(s.weights[i] / s.weights[5] == doctest::Approx(m.targets[i] / m.targets[5]).epsilon(1e-12));
    CHECK(operator_mass(s, m.spec) == doctest::Approx(m.spec.retained_mass()).epsilon(1e-12));
}

TEST_CASE("spectral-mass policies preserve total mass with the remainder")
{
    Model m(200);
    auto st = learned_prefix(200, 7, 3.0);
    st.t = 50.0;
    EvolutionKernel probe = m.ek;
    probe.C_beta = 2.0;
    const std::vector<SamplerPolicy> policies{Oracle{1.0}, OnlineProbe{probe, 1.0}, SelfScoring{0.5},
                                              Ensemble{{}, {m.ek, probe}}};
    const double total = m.spec.retained_mass() + m.spec.remainder_mass();
    for (const auto& pol : policies) {
        CHECK(normalization_of(pol) == Normalization::spectral_mass);
        const auto s = weights_at(pol, m.ctx(TailModel::remainder), st);
        const auto omega = s.operator_weights();
        CHECK(operator_mass(s, m.spec) + omega.back() * m.spec.remainder_mass()
              == doctest::Approx(total).epsilon(1e-12));
        CHECK(mean(s.weights) == doctest::Approx(1.0).epsilon(1e-12));
        for (double w : s.weights) CHECK(w >= 0.0);
    }
}

TEST_CASE("ensemble samples the disagreement band")
{
    Model m(100);
    const auto s = weights_at(Ensemble{{10, 30}, {}}, m.ctx(), ModeState::initial(100));
    for (std::size_t i = 0; i < 100; ++i) CHECK((s.weights[i] > 0.0) == (i >= 10 && i < 30));
    const auto agree = weights_at(Ensemble{{20, 20}, {}}, m.ctx(), ModeState::initial(100));
    for (double w : agree.weights) CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("synthetic self puts no synthetic mass on unlearned modes")
{
    Model m(60);
    auto st = learned_prefix(60, 12, 1.0);
    const auto pure = weights_at(Synthetic{SyntheticSource::self, 0, 1.0}, m.ctx(), st);
    for (std::size_t i = 12; i < 60; ++i) CHECK(pure.weights[i] == 0.0);
    CHECK(mean(pure.weights) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pure.gain == 1.0);

    const auto half = weights_at(Synthetic{SyntheticSource::self, 0, 0.5}, m.ctx(), st);
    CHECK(half.weights[30] == doctest::Approx(0.5));
    CHECK(mean(half.weights) == doctest::Approx(1.0).epsilon(1e-14));

    const auto empty = weights_at(Synthetic{SyntheticSource::self, 0, 1.0}, m.ctx(), ModeState::initial(60));
    for (double w : empty.weights) CHECK(w == 1.0);

    const auto teacher = weights_at(Synthetic{SyntheticSource::teacher, 20, 1.0}, m.ctx(), ModeState::initial(60));
    for (std::size_t i = 0; i < 60; ++i) CHECK((teacher.weights[i] > 0.0) == (i < 20));
}

TEST_CASE("policy metadata and validation")
{
    CHECK(policy_kind(uniform_policy(3)) == "static");
    CHECK(policy_kind(Oracle{}) == "oracle");
    CHECK(policy_kind(Synthetic{SyntheticSource::teacher, 2, 0.5}) == "synthetic-teacher");
    CHECK_THROWS_AS(validate_policy(Static{{1.0, 2.0}}, 3), std::invalid_argument);
    CHECK_THROWS_AS(validate_policy(Static{{0.0, 0.0, 0.0}}, 3), std::invalid_argument);
    CHECK_THROWS_AS(validate_policy(Synthetic{SyntheticSource::self, 0, 1.5}, 3), std::invalid_argument);
    CHECK_THROWS_AS(validate_policy(SelfScoring{-1.0}, 3), std::invalid_argument);
    Model m(10);
    CHECK_THROWS_AS(weights_at(uniform_policy(10), m.ctx(), ModeState::initial(9)), std::invalid_argument);
}

TEST_CASE("weight entropy")
{
    CHECK(weight_entropy(std::vector<double>(8, 1.0)) == doctest::Approx(std::log(8.0)));
    CHECK(weight_entropy(std::vector<double>{0.0, 4.0, 0.0}) == 0.0);
}
