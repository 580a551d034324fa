#pragma once

// Finite realization of the reweighted operator T_w = M_√w T M_√w on a
// uniform discrete measure, its spectra and Loewner comparisons, and the
// feature-span rank analysis for synthetic augmentation.

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "specdyn/random.hpp"
#include "specdyn/spectral_core.hpp"

namespace specdyn {

/// Relative asymmetry tolerance for KernelMatrix.
inline constexpr double kSymmetryTol = 1e-12;
/// Eigenvalues above -kPsdTol·λ_max are round-off and clamp to zero.
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kDefaultRankTol = 1e-8;

/// Square symmetric matrix; symmetry is checked on construction.
class KernelMatrix {
public:
    explicit KernelMatrix(Eigen::MatrixXd entries);

    Eigen::Index n() const noexcept { return m_.rows(); }
    const Eigen::MatrixXd& entries() const noexcept { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Eigen::MatrixXd m_;
};

/// Per-sample weights with 0 ≤ w ≤ cap and mean 1.
class SamplingWeights {
public:
    SamplingWeights(std::vector<double> w, double cap);

    static SamplingWeights uniform(std::size_t n);

    /// Rescales nonnegative raw scores to mean 1, then projects under `cap`
    /// by clipping and redistributing the excess over the unclipped entries.
    static SamplingWeights normalized(std::vector<double> raw, double cap);

    std::size_t size() const noexcept { return w_.size(); }
    std::span<const double> values() const noexcept { return w_; }
    double operator[](std::size_t i) const { return w_[i]; }
    double cap() const noexcept { return cap_; }

private:
    std::vector<double> w_;
    double cap_;
};

/// U(0,1) raw weights projected to mean 1 under `cap`.
SamplingWeights random_bounded_weights(std::size_t n, double cap, Rng& rng);

struct EigenSpectrum {
    std::vector<double> values;         // descending, clamped at 0
    std::optional<Eigen::MatrixXd> basis;  // column i pairs with values[i]

    bool basis_present() const noexcept { return basis.has_value(); }
};

enum class Basis { random_orthogonal, identity };

/// Q·diag(λ_1..λ_n)·Qᵀ with Q Haar-distributed from `seed`, or Q = I.
KernelMatrix synthesize_kernel(const PowerLawSpectrum& spec, std::size_t n, std::uint64_t seed,
                               Basis basis = Basis::random_orthogonal);

/// result[i][j] = √w_i·√w_j·T[i][j]. Zero weights leave zero rows/columns.
KernelMatrix reweight(const KernelMatrix& T, const SamplingWeights& w);

/// T^{1/2}·diag(w)·T^{1/2}: symmetric, isospectral with reweight(T, w).
KernelMatrix transported_reweight(const KernelMatrix& T, const SamplingWeights& w);

/// Full descending spectrum of a PSD kernel. Throws std::domain_error when an
/// eigenvalue is below -kPsdTol·λ_max.
EigenSpectrum eig_desc(const KernelMatrix& T, bool keep_basis = false);

/// Descending eigenvalues of any symmetric matrix, no clamping.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m);

struct DominanceReport {
    double min_gap_eigenvalue = 0.0;  // λ_min(M·A − B)
    double lambda_max_a = 0.0;
    bool loewner = false;             // M·A − B ⪰ 0 up to kPsdTol·λ_max(A)
    bool eigen_corollary = false;     // λ_k(B) ≤ M·λ_k(A)·(1 + 1e-8) for all k
    double worst_ratio = 0.0;         // max_k λ_k(B) / (M·λ_k(A)) over λ_k(A) > 0
};

DominanceReport dominance_report(const KernelMatrix& A, const KernelMatrix& B, double M);

/// B ⪯ M·A in the Loewner order, together with the eigenvalue corollary.
bool dominance_check(const KernelMatrix& A, const KernelMatrix& B, double M);

/// Rows are feature vectors Φ(x_i).
struct FeatureSpan {
    Eigen::MatrixXd features;
    double rank_tol = kDefaultRankTol;
};

std::vector<double> singular_values(const Eigen::MatrixXd& m);

/// Number of singular values above rank_tol·σ_max.
std::size_t span_rank(const FeatureSpan& F);

/// Samples from the model's own span.
struct SelfGenerator {};
using SpanSource = std::variant<SelfGenerator, FeatureSpan>;

/// Appends `count` seeded Gaussian combinations of the source's rows.
FeatureSpan augment_span(const FeatureSpan& F, const SpanSource& source, std::size_t count,
                         std::uint64_t seed);

/// m×d features spanning a random subspace of dimension `rank`.
FeatureSpan random_feature_span(std::size_t m, std::size_t d, std::size_t rank, std::uint64_t seed);

}  // namespace specdyn
