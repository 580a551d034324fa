#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "specdyn/operator_lab.hpp"
#include "support/jacobi.hpp"

using namespace specdyn;

namespace {

constexpr double kSqrtThreeQuarters = 0.866025403784438647;

KernelMatrix two_by_two()
{
    Eigen::MatrixXd m(2, 2);
    m << 2, 1, 1, 2;
    return KernelMatrix(m);
}

KernelMatrix random_psd(Eigen::Index n, std::uint64_t seed)
{
    Rng rng = make_rng(seed, "test-psd");
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = standard_normal(rng);
    Eigen::MatrixXd a = g * g.transpose();
    return KernelMatrix(0.5 * (a + a.transpose()));
}

}  // namespace

TEST_CASE("KernelMatrix rejects asymmetric and non-square input")
{
    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(KernelMatrix{m}, std::invalid_argument);
    CHECK_THROWS_AS(KernelMatrix{Eigen::MatrixXd::Zero(2, 3)}, std::invalid_argument);
    m(1, 0) = 0.5 * (1 + 1e-14);
    CHECK_NOTHROW(KernelMatrix{m});
}

TEST_CASE("SamplingWeights enforce bounds and unit mean")
{
    CHECK_NOTHROW(SamplingWeights({0.5, 1.5}, 2.0));
    CHECK_THROWS_AS(SamplingWeights({0.5, 1.6}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(SamplingWeights({-0.5, 2.5}, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(SamplingWeights({0.5, 2.5}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(SamplingWeights({}, 2.0), std::invalid_argument);
}

TEST_CASE("normalized weights project under the cap")
{
    const auto w = SamplingWeights::normalized({10.0, 1.0, 1.0, 1.0, 0.0}, 2.0);
    const double mean = std::accumulate(w.values().begin(), w.values().end(), 0.0) / 5.0;
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : w.values()) CHECK(x <= 2.0);
    CHECK(w[0] == 2.0);
    CHECK(w[4] == 0.0);
    CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(SamplingWeights::normalized({1.0, 0.0, 0.0, 0.0}, 2.0), std::invalid_argument);
}

TEST_CASE("random bounded weights satisfy the invariants")
{
    Rng rng = make_rng(3, "w");
    for (double cap : {1.5, 4.0, 10.0}) {
        const auto w = random_bounded_weights(1024, cap, rng);
        double sum = 0.0;
        for (double x : w.values()) {
            CHECK(x >= 0.0);
            CHECK(x <= cap);
            sum += x;
        }
        CHECK(sum / 1024.0 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("synthesize_kernel with identity basis is diagonal")
{
    const auto T = synthesize_kernel(make_spectrum(2.0, 1.0, 3), 3, 0, Basis::identity);
    Eigen::MatrixXd expect = Eigen::Vector3d(1.0, 0.25, 1.0 / 9.0).asDiagonal();
    CHECK((T.entries() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("synthesize_kernel reproduces the prescribed spectrum")
{
    const auto spec = make_spectrum(2.0, 1.0, 64);
    const auto A = synthesize_kernel(spec, 40, 1);
    const auto B = synthesize_kernel(spec, 40, 2);
    CHECK((A.entries() - B.entries()).norm() > 1e-3);
    const auto ea = eig_desc(A).values;
    const auto eb = eig_desc(B).values;
    const auto oracle = testing::jacobi_eigenvalues(A.entries());
    for (std::size_t k = 0; k < 40; ++k) {
        CHECK(std::abs(ea[k] - spec[k]) <= 1e-8 * spec[0]);
        CHECK(std::abs(eb[k] - spec[k]) <= 1e-8 * spec[0]);
        CHECK(std::abs(oracle[k] - ea[k]) <= 1e-12);
    }
    CHECK_THROWS_AS(synthesize_kernel(spec, 65, 1), std::invalid_argument);
}

TEST_CASE("reweight scales entries by sqrt(w_i w_j)")
{
    const auto T = two_by_two();
    const auto R = reweight(T, SamplingWeights({0.5, 1.5}, 2.0));
    CHECK(R(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(R(0, 1) == doctest::Approx(kSqrtThreeQuarters).epsilon(1e-15));
    CHECK(R(1, 0) == doctest::Approx(kSqrtThreeQuarters).epsilon(1e-15));
    CHECK(R(1, 1) == doctest::Approx(3.0).epsilon(1e-15));

    CHECK((reweight(T, SamplingWeights::uniform(2)).entries() - T.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero weights remove rows and columns")
{
    const auto T = random_psd(6, 9);
    const auto R = reweight(T, SamplingWeights({0.0, 2.0, 0.0, 1.0, 1.5, 1.5}, 2.0));
    for (Eigen::Index k = 0; k < 6; ++k) {
        CHECK(R(0, k) == 0.0);
        CHECK(R(k, 0) == 0.0);
        CHECK(R(2, k) == 0.0);
        CHECK(R(k, 2) == 0.0);
    }
}

TEST_CASE("transported reweight is isospectral with reweight")
{
    const auto T = synthesize_kernel(make_spectrum(2.0, 1.0, 30), 30, 5);
    Rng rng = make_rng(5, "w");
    const auto w = random_bounded_weights(30, 3.0, rng);
    const auto a = eig_desc(reweight(T, w)).values;
    const auto b = eig_desc(transported_reweight(T, w)).values;
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
}

TEST_CASE("eig_desc on small known matrices")
{
    Eigen::MatrixXd d = Eigen::Vector3d(3, 1, 2).asDiagonal();
    CHECK(eig_desc(KernelMatrix(d)).values == std::vector<double>{3, 2, 1});

    const auto e = eig_desc(two_by_two(), true);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(e.basis_present());
    const Eigen::MatrixXd& V = *e.basis;
    const Eigen::MatrixXd recon = V * Eigen::Vector2d(e.values[0], e.values[1]).asDiagonal() * V.transpose();
    CHECK((recon - two_by_two().entries()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_FALSE(eig_desc(two_by_two()).basis_present());

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(eig_desc(KernelMatrix(indefinite)), std::domain_error);
}

TEST_CASE("eig_desc trace identity and agreement with Jacobi on random PSD")
{
    const auto T = random_psd(50, 17);
    const auto e = eig_desc(T).values;
    const double sum = std::accumulate(e.begin(), e.end(), 0.0);
    CHECK(std::abs(sum - T.entries().trace()) <= 1e-8 * T.entries().trace());
    for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] <= e[k - 1]);
    const auto oracle = testing::jacobi_eigenvalues(T.entries());
    for (std::size_t k = 0; k < e.size(); ++k) CHECK(std::abs(oracle[k] - e[k]) <= 1e-10 * e[0]);
}

TEST_CASE("dominance on reflexive, reweighted and counterexample pairs")
{
    const auto T = random_psd(8, 4);
    CHECK(dominance_check(T, T, 1.0));

    Eigen::MatrixXd a = Eigen::Vector2d(1, 1).asDiagonal();
    Eigen::MatrixXd b = Eigen::Vector2d(2, 0).asDiagonal();
    CHECK_FALSE(dominance_check(KernelMatrix(a), KernelMatrix(b), 1.0));
    const auto rep = dominance_report(KernelMatrix(a), KernelMatrix(b), 1.0);
    CHECK(rep.min_gap_eigenvalue == doctest::Approx(-1.0));
    CHECK_FALSE(rep.loewner);

    // Bounded reweighting need not be Loewner-dominated: cap*T - T_w has
    // eigenvalue 1 - sqrt(5) here, while the eigenvalue corollary holds.
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
    const KernelMatrix J(ones);
    const auto pruned = reweight(J, SamplingWeights({2.0, 0.0}, 2.0));
    const auto counter = dominance_report(J, pruned, 2.0);
    CHECK_FALSE(dominance_check(J, pruned, 2.0));
    CHECK(counter.min_gap_eigenvalue == doctest::Approx(1.0 - std::sqrt(5.0)).epsilon(1e-14));
    CHECK(counter.eigen_corollary);

    // Diagonal kernels commute with diag(w), so T_w <= cap*T holds exactly.
    const auto D = synthesize_kernel(make_spectrum(2.0, 1.0, 16), 16, 0, Basis::identity);
    Rng rng = make_rng(8, "w");
    const auto w = random_bounded_weights(16, 4.0, rng);
    CHECK(dominance_check(D, reweight(D, w), 4.0));
}

TEST_CASE("eigenvalue corollary holds for bounded reweighting of a generic kernel")
{
    const auto T = synthesize_kernel(make_spectrum(2.0, 1.0, 64), 64, 12);
    Rng rng = make_rng(12, "w");
    for (int trial = 0; trial < 5; ++trial) {
        const double cap = uniform(rng, 1.5, 10.0);
        const auto w = random_bounded_weights(64, cap, rng);
        const auto rep = dominance_report(T, reweight(T, w), cap);
        CHECK(rep.eigen_corollary);
        CHECK(rep.worst_ratio <= 1.0 + 1e-8);
        // The transported form is dominated in the Loewner order.
        CHECK(dominance_report(T, transported_reweight(T, w), cap).loewner);
    }
}

TEST_CASE("span_rank counts independent directions")
{
    Eigen::MatrixXd f(3, 3);
    f << 1, 0, 0, 0, 1, 0, 1, 1, 0;
    CHECK(span_rank({f}) == 2);

    Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 4);
    one(0, 2) = 3.0;
    CHECK(span_rank({one}) == 1);

    Rng rng = make_rng(2, "g");
    Eigen::MatrixXd g(7, 5);
    for (Eigen::Index j = 0; j < 5; ++j)
        for (Eigen::Index i = 0; i < 7; ++i) g(i, j) = standard_normal(rng);
    CHECK(span_rank({g}) == 5);
    CHECK(singular_values(g).size() == 5);
}

TEST_CASE("self augmentation never leaves the span")
{
    const auto F = random_feature_span(12, 10, 3, 21);
    CHECK(span_rank(F) == 3);
    const auto G = augment_span(F, SelfGenerator{}, 100, 22);
    CHECK(G.features.rows() == 112);
    CHECK(span_rank(G) == 3);

    const auto same = augment_span(F, SelfGenerator{}, 0, 22);
    CHECK(same.features == F.features);
}

TEST_CASE("teacher augmentation raises rank")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto F = random_feature_span(6, 5, 2, seed);
        const auto teacher = random_feature_span(6, 5, 5, seed + 100);
        CHECK(span_rank(augment_span(F, teacher, 10, seed + 200)) > 2);
    }
    const auto F = random_feature_span(6, 5, 2, 1);
    const auto wrong = random_feature_span(6, 4, 2, 2);
    CHECK_THROWS_AS(augment_span(F, wrong, 3, 0), std::invalid_argument);
}

TEST_CASE("operator constructions are deterministic in the seed")
{
    const auto spec = make_spectrum(1.5, 1.0, 20);
    CHECK(synthesize_kernel(spec, 20, 7).entries() == synthesize_kernel(spec, 20, 7).entries());
    CHECK(random_feature_span(8, 6, 3, 4).features == random_feature_span(8, 6, 3, 4).features);
}
