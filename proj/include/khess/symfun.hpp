#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace khess::symfun {

/// Binomial coefficient C(n,k) as a double. Exact for the small n used here.
[[nodiscard]] inline double binom(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) {
        r *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return std::round(r);
}

/// A list of n real eigenvalues, n between 1 and 8.
struct Spectrum {
    Eigen::VectorXd values;

    explicit Spectrum(Eigen::VectorXd v) : values(std::move(v))
    {
        const auto n = values.size();
        if (n < 1 || n > 8) {
            throw std::invalid_argument("Spectrum: dimension must be in [1,8]");
        }
        if (!values.allFinite()) {
            throw std::invalid_argument("Spectrum: entries must be finite");
        }
    }

    [[nodiscard]] int n() const { return static_cast<int>(values.size()); }
};

/// All elementary symmetric functions e_0..e_n of the entries of lambda,
/// via the Newton-Girard recursion on power sums:
///   k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i,  p_i = sum_j lambda_j^i.
/// e_0 = 1 and e_n (the full product) are set directly.
[[nodiscard]] inline Eigen::VectorXd elementary_symmetric_all(const Eigen::VectorXd& lambda)
{
    const int n = static_cast<int>(lambda.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n + 1);  // power sums, p[0] unused
    for (int i = 1; i <= n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::pow(lambda[j], i);
        p[i] = s;
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
    e[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        double sign = 1.0;
        for (int i = 1; i <= k; ++i) {
            acc += sign * e[k - i] * p[i];
            sign = -sign;
        }
        e[k] = acc / static_cast<double>(k);
    }
    if (n >= 1) {
        e[n] = lambda.prod();
    }
    return e;
}

/// S_k of a spectrum: the sum over all k-subsets of eigenvalue products.
/// k = 0 returns 1, k = n returns the full product.
[[nodiscard]] inline double elementary_symmetric(const Spectrum& spec, int k)
{
    const int n = spec.n();
    if (k < 0 || k > n) {
        throw std::domain_error("elementary_symmetric: k out of range [0,n]");
    }
    if (k == 0) return 1.0;
    if (k == n) return spec.values.prod();
    return elementary_symmetric_all(spec.values)[k];
}

namespace detail {

/// e_k of the spectrum with entry `skip` removed (the S_k(i) of the
/// diagonal derivative formula). Recomputed on the reduced list; at the
/// desk scales used here this is cheaper than it looks and avoids the
/// cancellation of the divide-out recurrence.
[[nodiscard]] inline double esf_excluding(const Eigen::VectorXd& lambda, int skip, int k)
{
    const int n = static_cast<int>(lambda.size());
    assert(skip >= 0 && skip < n);
    if (k < 0 || k > n - 1) return 0.0;
    if (k == 0) return 1.0;
    Eigen::VectorXd reduced(n - 1);
    int m = 0;
    for (int i = 0; i < n; ++i) {
        if (i != skip) reduced[m++] = lambda[i];
    }
    return elementary_symmetric_all(reduced)[k];
}

inline void require_symmetric(const Eigen::MatrixXd& A)
{
    if (A.rows() != A.cols() || A.rows() < 1 || A.rows() > 8) {
        throw std::invalid_argument("SymMatrix: must be square with dimension in [1,8]");
    }
    if (!A.allFinite()) {
        throw std::invalid_argument("SymMatrix: entries must be finite");
    }
    const double scale = 1.0 + A.cwiseAbs().maxCoeff();
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw std::invalid_argument("SymMatrix: asymmetry beyond tolerance");
    }
}

}  // namespace detail

/// Eigenvalues of a symmetric matrix, ascending.
[[nodiscard]] inline Eigen::VectorXd eigenvalues_sym(const Eigen::MatrixXd& A)
{
    detail::require_symmetric(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// S_k(A): the sum of all k x k principal minors, computed as the k-th
/// elementary symmetric function of the eigenvalues. Invariant under
/// orthogonal conjugation.
[[nodiscard]] inline double sk_of_matrix(const Eigen::MatrixXd& A, int k)
{
    detail::require_symmetric(A);
    const int n = static_cast<int>(A.rows());
    if (k < 0 || k > n) {
        throw std::domain_error("sk_of_matrix: k out of range [0,n]");
    }
    if (k == 0) return 1.0;
    return elementary_symmetric(Spectrum(eigenvalues_sym(A)), k);
}

/// Derivative tensor S_k^{ij}(A) = dS_k/da_ij. In the eigenframe it is
/// diagonal with entries S_{k-1}(i) (the (k-1)-st symmetric function of the
/// eigenvalues excluding lambda_i); rotating back gives the full tensor.
/// For k = n this is the cofactor matrix: S_n^{ij}(A) A = det(A) I.
/// Euler's identity holds: S_k = (1/k) sum_ij S_k^{ij} a_ij.
[[nodiscard]] inline Eigen::MatrixXd sk_ij(const Eigen::MatrixXd& A, int k)
{
    detail::require_symmetric(A);
    const int n = static_cast<int>(A.rows());
    if (k < 1 || k > n) {
        throw std::domain_error("sk_ij: k out of range [1,n]");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& Q = es.eigenvectors();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        d[i] = detail::esf_excluding(lam, i, k - 1);
    }
    Eigen::MatrixXd M = Q * d.asDiagonal() * Q.transpose();
    return 0.5 * (M + M.transpose());
}

/// Same as sk_ij but acting on an already-diagonal spectrum; returns the
/// diagonal entries S_{k-1}(i) without the eigendecomposition round trip.
[[nodiscard]] inline Eigen::VectorXd sk_ij_diag(const Eigen::VectorXd& lambda, int k)
{
    const int n = static_cast<int>(lambda.size());
    if (k < 1 || k > n) {
        throw std::domain_error("sk_ij_diag: k out of range [1,n]");
    }
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        d[i] = detail::esf_excluding(lambda, i, k - 1);
    }
    return d;
}

/// Maclaurin ratios (S_k / C(n,k))^{1/k}, k = 1..n. A term is undefined
/// (flagged false, value NaN) when S_k < 0 and the fractional root would
/// leave the reals. On Gamma_n spectra the chain is non-increasing, with
/// all terms equal exactly for constant spectra.
struct NewtonChain {
    std::vector<double> terms;
    std::vector<bool> defined;
};

[[nodiscard]] inline NewtonChain newton_chain(const Spectrum& spec)
{
    const int n = spec.n();
    const Eigen::VectorXd e = elementary_symmetric_all(spec.values);
    NewtonChain chain;
    chain.terms.resize(n);
    chain.defined.resize(n);
    for (int k = 1; k <= n; ++k) {
        const double normalized = e[k] / binom(n, k);
        if (normalized < 0.0) {
            chain.terms[k - 1] = std::numeric_limits<double>::quiet_NaN();
            chain.defined[k - 1] = false;
        } else {
            chain.terms[k - 1] = std::pow(normalized, 1.0 / static_cast<double>(k));
            chain.defined[k - 1] = true;
        }
    }
    return chain;
}

inline constexpr double kConeTol = 1e-9;

/// Membership of A in the Garding cone Gamma_k: S_i(A) >= -tol for i=1..k.
[[nodiscard]] inline bool gamma_k_member(const Eigen::MatrixXd& A, int k,
                                         double tol = kConeTol)
{
    detail::require_symmetric(A);
    const int n = static_cast<int>(A.rows());
    if (k < 1 || k > n) {
        throw std::domain_error("gamma_k_member: k out of range [1,n]");
    }
    const Eigen::VectorXd e = elementary_symmetric_all(eigenvalues_sym(A));
    for (int i = 1; i <= k; ++i) {
        if (e[i] < -tol) return false;
    }
    return true;
}

/// Gamma_k test directly on a spectrum (used on nodal Hessian eigenvalues).
[[nodiscard]] inline bool gamma_k_member_spectrum(const Eigen::VectorXd& lambda, int k,
                                                  double tol = kConeTol)
{
    const int n = static_cast<int>(lambda.size());
    if (k < 1 || k > n) {
        throw std::domain_error("gamma_k_member_spectrum: k out of range [1,n]");
    }
    const Eigen::VectorXd e = elementary_symmetric_all(lambda);
    for (int i = 1; i <= k; ++i) {
        if (e[i] < -tol) return false;
    }
    return true;
}

}  // namespace khess::symfun
