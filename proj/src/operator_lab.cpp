#include "specdyn/operator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace specdyn {

namespace {

double max_abs(const Eigen::MatrixXd& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void require_symmetric(const Eigen::MatrixXd& m, const char* who)
{
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(who) + ": matrix is not square");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
    }
    const double scale = max_abs(m);
    const double asym = max_abs(m - m.transpose());
    if (asym > kSymmetryTol * scale) {
        throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
    }
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    Eigen::MatrixXd m(rows, cols);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = standard_normal(rng);
    return m;
}

}  // namespace

KernelMatrix::KernelMatrix(Eigen::MatrixXd entries) : m_(std::move(entries))
{
    require_symmetric(m_, "KernelMatrix");
}

SamplingWeights::SamplingWeights(std::vector<double> w, double cap) : w_(std::move(w)), cap_(cap)
{
    if (w_.empty()) {
        throw std::invalid_argument("SamplingWeights: empty weight vector");
    }
    if (!std::isfinite(cap_) || cap_ < 1.0) {
        throw std::invalid_argument("SamplingWeights: cap must be finite and >= 1");
    }
    double sum = 0.0;
    for (double v : w_) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("SamplingWeights: negative or non-finite weight");
        }
        if (v > cap_) {
            throw std::invalid_argument("SamplingWeights: weight exceeds cap");
        }
        sum += v;
    }
    const double mean = sum / static_cast<double>(w_.size());
    if (std::abs(mean - 1.0) > 1e-12) {
        throw std::invalid_argument("SamplingWeights: mean must be 1");
    }
}

SamplingWeights SamplingWeights::uniform(std::size_t n)
{
    return SamplingWeights(std::vector<double>(n, 1.0), 1.0);
}

SamplingWeights SamplingWeights::normalized(std::vector<double> raw, double cap)
{
    const auto n = static_cast<double>(raw.size());
    double sum = 0.0;
    std::size_t positive = 0;
    for (double v : raw) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("SamplingWeights: raw weights must be finite and >= 0");
        }
        sum += v;
        positive += v > 0.0;
    }
    if (!(sum > 0.0)) {
        throw std::invalid_argument("SamplingWeights: raw weights are all zero");
    }
    if (static_cast<double>(positive) * cap < n) {
        throw std::invalid_argument("SamplingWeights: cap too small for the support");
    }
    for (double& v : raw) v *= n / sum;

    std::vector<char> clipped(raw.size(), 0);
    for (int iter = 0; iter < 1000; ++iter) {
        bool any = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] > cap) {
                raw[i] = cap;
                clipped[i] = 1;
                any = true;
            }
        }
        if (!any) break;
        double total = 0.0;
        double free_mass = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            total += raw[i];
            if (!clipped[i]) free_mass += raw[i];
        }
        if (!(free_mass > 0.0)) {
            throw std::invalid_argument("SamplingWeights: cannot reach mean 1 under cap");
        }
        const double scale = 1.0 + (n - total) / free_mass;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!clipped[i]) raw[i] *= scale;
        }
    }
    return SamplingWeights(std::move(raw), cap);
}

SamplingWeights random_bounded_weights(std::size_t n, double cap, Rng& rng)
{
    std::vector<double> raw(n);
    for (double& v : raw) v = uniform01(rng);
    return SamplingWeights::normalized(std::move(raw), cap);
}

KernelMatrix synthesize_kernel(const PowerLawSpectrum& spec, std::size_t n, std::uint64_t seed,
                               Basis basis)
{
    if (n > spec.size()) {
        throw std::invalid_argument("synthesize_kernel: n exceeds the number of modes K");
    }
    if (n == 0) {
        throw std::invalid_argument("synthesize_kernel: n must be positive");
    }
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::VectorXd lambda(N);
    for (Eigen::Index i = 0; i < N; ++i) lambda(i) = spec[static_cast<std::size_t>(i)];

    if (basis == Basis::identity) {
        return KernelMatrix(Eigen::MatrixXd(lambda.asDiagonal()));
    }

    Rng rng = make_rng(seed, "kernel-basis");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(N, N, rng));
    Eigen::MatrixXd Q = qr.householderQ();
    // Sign convention R_jj > 0 makes Q Haar-distributed.
    const Eigen::MatrixXd& R = qr.matrixQR();
    for (Eigen::Index j = 0; j < N; ++j) {
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    }
    Eigen::MatrixXd T = Q * lambda.asDiagonal() * Q.transpose();
    T = 0.5 * (T + T.transpose()).eval();
    return KernelMatrix(std::move(T));
}

KernelMatrix reweight(const KernelMatrix& T, const SamplingWeights& w)
{
    if (static_cast<std::size_t>(T.n()) != w.size()) {
        throw std::invalid_argument("reweight: dimension mismatch");
    }
    const Eigen::Index n = T.n();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double wij = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)];
            out(i, j) = std::sqrt(wij) * T(i, j);
        }
    }
    return KernelMatrix(std::move(out));
}

KernelMatrix transported_reweight(const KernelMatrix& T, const SamplingWeights& w)
{
    if (static_cast<std::size_t>(T.n()) != w.size()) {
        throw std::invalid_argument("transported_reweight: dimension mismatch");
    }
    const EigenSpectrum es = eig_desc(T, true);
    const Eigen::MatrixXd& V = *es.basis;
    Eigen::VectorXd root(T.n());
    for (Eigen::Index i = 0; i < T.n(); ++i) root(i) = std::sqrt(es.values[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd half = V * root.asDiagonal() * V.transpose();
    Eigen::VectorXd wv(T.n());
    for (Eigen::Index i = 0; i < T.n(); ++i) wv(i) = w[static_cast<std::size_t>(i)];
    Eigen::MatrixXd out = half * wv.asDiagonal() * half;
    out = 0.5 * (out + out.transpose()).eval();
    return KernelMatrix(std::move(out));
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m)
{
    require_symmetric(m, "symmetric_eigenvalues");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("symmetric_eigenvalues: solver did not converge");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return std::vector<double>(std::make_reverse_iterator(ev.data() + ev.size()),
                               std::make_reverse_iterator(ev.data()));
}

EigenSpectrum eig_desc(const KernelMatrix& T, bool keep_basis)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        T.entries(), keep_basis ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eig_desc: solver did not converge");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    const Eigen::Index n = ev.size();
    EigenSpectrum out;
    out.values.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = ev(n - 1 - i);

    const double top = n > 0 ? std::max(out.values.front(), 0.0) : 0.0;
    for (double& v : out.values) {
        if (v < -kPsdTol * top) {
            throw std::domain_error("eig_desc: matrix is not positive semidefinite (eigenvalue "
                                    + std::to_string(v) + ")");
        }
        v = std::max(v, 0.0);
    }
    if (keep_basis) {
        out.basis = solver.eigenvectors().rowwise().reverse();
    }
    return out;
}

DominanceReport dominance_report(const KernelMatrix& A, const KernelMatrix& B, double M)
{
    if (A.n() != B.n()) {
        throw std::invalid_argument("dominance_report: dimension mismatch");
    }
    if (!(M > 0.0) || !std::isfinite(M)) {
        throw std::invalid_argument("dominance_report: M must be positive and finite");
    }
    DominanceReport r;
    const std::vector<double> la = symmetric_eigenvalues(A.entries());
    const std::vector<double> lb = symmetric_eigenvalues(B.entries());
    r.lambda_max_a = la.empty() ? 0.0 : std::max(la.front(), 0.0);

    const Eigen::MatrixXd gap = M * A.entries() - B.entries();
    const std::vector<double> lg = symmetric_eigenvalues(0.5 * (gap + gap.transpose()));
    r.min_gap_eigenvalue = lg.empty() ? 0.0 : lg.back();
    r.loewner = r.min_gap_eigenvalue >= -kPsdTol * r.lambda_max_a;

    // Eigenvalues that are zero in exact arithmetic come out of the solver at
    // about n·eps·λ_max; that floor is added to the relative test.
    const double floor = 1e-12 * M * r.lambda_max_a;
    r.eigen_corollary = true;
    r.worst_ratio = 0.0;
    for (std::size_t k = 0; k < la.size(); ++k) {
        const double bound = M * la[k];
        if (lb[k] > bound * (1.0 + 1e-8) + floor) r.eigen_corollary = false;
        if (bound > floor) r.worst_ratio = std::max(r.worst_ratio, lb[k] / bound);
    }
    return r;
}

bool dominance_check(const KernelMatrix& A, const KernelMatrix& B, double M)
{
    const DominanceReport r = dominance_report(A, B, M);
    return r.loewner && r.eigen_corollary;
}

std::vector<double> singular_values(const Eigen::MatrixXd& m)
{
    if (m.size() == 0) return {};
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

std::size_t span_rank(const FeatureSpan& F)
{
    if (!(F.rank_tol > 0.0)) {
        throw std::invalid_argument("span_rank: rank_tol must be positive");
    }
    const std::vector<double> s = singular_values(F.features);
    if (s.empty() || s.front() == 0.0) return 0;
    const double cut = F.rank_tol * s.front();
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) { return v > cut; }));
}

FeatureSpan augment_span(const FeatureSpan& F, const SpanSource& source, std::size_t count,
                         std::uint64_t seed)
{
    const Eigen::MatrixXd* rows = &F.features;
    if (const auto* teacher = std::get_if<FeatureSpan>(&source)) {
        if (teacher->features.cols() != F.features.cols()) {
            throw std::invalid_argument("augment_span: teacher feature dimension differs");
        }
        rows = &teacher->features;
    }
    if (count == 0) return F;
    if (rows->rows() == 0) {
        throw std::invalid_argument("augment_span: source has no rows");
    }
    Rng rng = make_rng(seed, "augment");
    // Coefficients ~ N(0, 1/rows) keep new rows at the typical row norm, so
    // repeated augmentation does not let one direction swamp the rest.
    const Eigen::MatrixXd coeff = gaussian_matrix(static_cast<Eigen::Index>(count), rows->rows(), rng)
                                  / std::sqrt(static_cast<double>(rows->rows()));
    FeatureSpan out{Eigen::MatrixXd(F.features.rows() + coeff.rows(), F.features.cols()), F.rank_tol};
    out.features.topRows(F.features.rows()) = F.features;
    out.features.bottomRows(coeff.rows()) = coeff * *rows;
    return out;
}

FeatureSpan random_feature_span(std::size_t m, std::size_t d, std::size_t rank, std::uint64_t seed)
{
    if (rank > std::min(m, d)) {
        throw std::invalid_argument("random_feature_span: rank exceeds min(m, d)");
    }
    Rng rng = make_rng(seed, "feature-span");
    const auto M = static_cast<Eigen::Index>(m);
    const auto D = static_cast<Eigen::Index>(d);
    const auto R = static_cast<Eigen::Index>(rank);
    const Eigen::MatrixXd left = gaussian_matrix(M, R, rng);
    const Eigen::MatrixXd right = gaussian_matrix(R, D, rng);
    return FeatureSpan{left * right, kDefaultRankTol};
}

}  // namespace specdyn
