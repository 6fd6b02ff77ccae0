#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "khess/geometry.hpp"
#include "khess/pfunction.hpp"
#include "khess/solution.hpp"
#include "khess/symfun.hpp"

namespace khess::identities {

struct Term {
    std::string name;
    double value = 0.0;
};

/// LHS/RHS record for one integral identity. The residual is |sum(lhs) -
/// sum(rhs)|; the pass rule is residual <= tol * max(1, largest |term|), so
/// the tolerance acts relatively on O(1) identities and absolutely on the
/// all-zero ball cases.
struct IdentityReport {
    std::string name;
    std::vector<Term> lhs;
    std::vector<Term> rhs;
    double residual = 0.0;
    double rel_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    [[nodiscard]] double lhs_total() const
    {
        double s = 0.0;
        for (const auto& t : lhs) s += t.value;
        return s;
    }
    [[nodiscard]] double rhs_total() const
    {
        double s = 0.0;
        for (const auto& t : rhs) s += t.value;
        return s;
    }
};

[[nodiscard]] inline IdentityReport make_report(std::string name, std::vector<Term> lhs,
                                                std::vector<Term> rhs, double tol)
{
    IdentityReport rep;
    rep.name = std::move(name);
    rep.lhs = std::move(lhs);
    rep.rhs = std::move(rhs);
    rep.tolerance = tol;
    double scale = 0.0;
    for (const auto& t : rep.lhs) scale = std::max(scale, std::abs(t.value));
    for (const auto& t : rep.rhs) scale = std::max(scale, std::abs(t.value));
    rep.residual = std::abs(rep.lhs_total() - rep.rhs_total());
    rep.rel_residual = rep.residual / std::max(scale, 1.0);
    rep.pass = rep.residual <= tol * std::max(scale, 1.0);
    return rep;
}

struct DeficitPair {
    double d1 = 0.0;  // volume deficit: int [1 - S_{k+1}/binom(n,k+1)]
    double d2 = 0.0;  // boundary deficit: R^{-k} int |grad u|^{k+1} - int |grad u|
};

namespace detail {

template <typename F>
[[nodiscard]] double volume_integral(const solver::Solution& sol, F&& fn)
{
    double acc = 0.0;
    for (const auto& s : sol.volume_samples()) acc += fn(s) * s.w;
    return acc;
}

template <typename F>
[[nodiscard]] double boundary_integral(const solver::Solution& sol, F&& fn)
{
    const auto& tr = sol.trace();
    const auto& bg = sol.boundary_grad();
    double acc = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        acc += fn(tr.samples[i], bg[i]) * tr.samples[i].weight;
    }
    return acc;
}

[[nodiscard]] inline double support_origin(const geom::BoundarySample& s,
                                           const Eigen::VectorXd& center)
{
    // <x, nu> with x from the coordinate origin
    return s.support + center.dot(s.normal);
}

}  // namespace detail

/// Polynomial f(u) = sum_i coef[i] u^i with its antiderivative
/// F(u) = int_u^0 f(s) ds computed exactly.
struct Polynomial {
    Eigen::VectorXd coef;

    [[nodiscard]] double operator()(double u) const
    {
        double acc = 0.0;
        for (int i = static_cast<int>(coef.size()) - 1; i >= 0; --i) acc = acc * u + coef[i];
        return acc;
    }
    [[nodiscard]] double big_F(double u) const
    {
        // F(u) = -sum_i coef[i] u^{i+1}/(i+1)
        double acc = 0.0;
        for (int i = static_cast<int>(coef.size()) - 1; i >= 0; --i) {
            acc = acc * u + coef[i] / (i + 1.0);
        }
        return -acc * u;
    }
};

struct PohozaevResult {
    IdentityReport general;                     // the identity for S_k(D^2u) = f(u)
    std::optional<IdentityReport> simplified;   // constant-f form
};

/// Pohozaev identity:
///   (n-2k)/(k(k+1)) int S_k^{ij} u_i u_j + binom(n-1,k-1)/(k+1) int_b
///   H_{k-1} <x,nu> |grad u|^{k+1} = n int F(u),
/// and, when f is the constant binom(n,k), the simplified form
///   int (-u) = 1/(n(n+2)) int_b H_{k-1} <x,nu> |grad u|^{k+1}.
[[nodiscard]] inline PohozaevResult pohozaev_residual(const solver::Solution& sol,
                                                      const Polynomial& f, double tol)
{
    const int n = sol.dim();
    const int k = sol.hessian_order();
    const auto& tr = sol.trace();
    const Eigen::VectorXd hk1 = geom::mean_curvature_k(tr, k - 1);

    const double vol_term = detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
        const Eigen::MatrixXd skij = symfun::sk_ij(s.hess, k);
        return (s.grad.transpose() * skij * s.grad).value();
    });
    int bi = 0;
    const double bnd_term = detail::boundary_integral(sol, [&](const geom::BoundarySample& s,
                                                               double g) {
        return hk1[bi++] * detail::support_origin(s, tr.center) * std::pow(g, k + 1);
    });
    const double rhs = detail::volume_integral(
        sol, [&](const solver::VolumeSample& s) { return f.big_F(s.u); });

    PohozaevResult out;
    out.general = make_report(
        "pohozaev_general",
        {{"(n-2k)/(k(k+1)) int Sk^ij u_i u_j", (n - 2.0 * k) / (k * (k + 1.0)) * vol_term},
         {"binom(n-1,k-1)/(k+1) int H_{k-1}<x,nu>|grad u|^{k+1}",
          symfun::binom(n - 1, k - 1) / (k + 1.0) * bnd_term}},
        {{"n int F(u)", n * rhs}}, tol);

    const bool constant_f =
        f.coef.size() >= 1 && std::abs(f.coef[0] - symfun::binom(n, k)) < 1e-12 &&
        (f.coef.size() == 1 || f.coef.tail(f.coef.size() - 1).cwiseAbs().maxCoeff() == 0.0);
    if (constant_f) {
        const double int_mu =
            detail::volume_integral(sol, [](const solver::VolumeSample& s) { return -s.u; });
        out.simplified = make_report("pohozaev_constant", {{"int(-u)", int_mu}},
                                     {{"1/(n(n+2)) int H_{k-1}<x,nu>|grad u|^{k+1}",
                                       bnd_term / (n * (n + 2.0))}},
                                     tol);
    }
    return out;
}

/// Fundamental identity behind the Serrin-type stability analysis. For k < n:
///   binom(n,k)^{-1} (2/k) int (-u) L[P] + n int (-u)[Du/n - S_k/binom(n,k)]
///     = (1/n) int_b H_{k-1} |grad u|^{k+1} (|grad u| - <x,nu>);
/// for k = n the left side is int (-u) L[P] and the prefactor is 1/(n+2).
[[nodiscard]] inline IdentityReport serrin_fundamental_residual(const solver::Solution& sol,
                                                                double tol)
{
    const int n = sol.dim();
    const int k = sol.hessian_order();
    const auto& tr = sol.trace();
    const double cnk = symfun::binom(n, k);
    const Eigen::VectorXd hk1 = geom::mean_curvature_k(tr, k - 1);

    int bi = 0;
    const double rhs_int = detail::boundary_integral(
        sol, [&](const geom::BoundarySample& s, double g) {
            return hk1[bi++] * std::pow(g, k + 1) * (g - detail::support_origin(s, tr.center));
        });

    if (k == n) {
        const double lhs = detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
            return -s.u * pfun::node_algebra(s.hess, k).lp();
        });
        return make_report("serrin_fundamental_k_eq_n", {{"int(-u)L[P]", lhs}},
                           {{"1/(n+2) int H_{n-1}|grad u|^{n+1}(|grad u|-<x,nu>)",
                             rhs_int / (n + 2.0)}},
                           tol);
    }
    const double t1 = detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
        return -s.u * pfun::node_algebra(s.hess, k).lp();
    });
    const double t2 = detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
        const auto a = pfun::node_algebra(s.hess, k);
        return -s.u * (a.laplacian() / n - a.sk() / cnk);
    });
    return make_report("serrin_fundamental",
                       {{"binom^{-1}(2/k) int(-u)L[P]", (2.0 / k) / cnk * t1},
                        {"n int(-u)[Du/n - S_k/binom]", n * t2}},
                       {{"(1/n) int H_{k-1}|grad u|^{k+1}(|grad u|-<x,nu>)", rhs_int / n}}, tol);
}

struct SbtResult {
    IdentityReport main;      // the fundamental identity with deficits
    IdentityReport variant;   // the weighted rewritten form
    DeficitPair deficits;
};

/// Fundamental identity of the higher-order constant-curvature analysis:
///   binom(n,k)^{-1} int L[P] + k D1 + D2
///     = int_b (1/R^k - H_k) |grad u|^{k+1},
/// where D1 = int [1 - S_{k+1}/binom(n,k+1)], D2 = R^{-k} int |grad u|^{k+1}
/// - int |grad u|, and R is the boundary mean of |grad u|. The variant form
/// moves D2 to the right:
///   binom(n,k)^{-1} int L[P] + k D1 = int_b (1 - H_k |grad u|^k) |grad u|.
[[nodiscard]] inline SbtResult sbt_identity_residual(const solver::Solution& sol, double tol)
{
    const int n = sol.dim();
    const int k = sol.hessian_order();
    if (k >= n) {
        throw std::domain_error("sbt_identity_residual: k = n not defined (H_k term needs k <= n-1)");
    }
    const auto& tr = sol.trace();
    const double cnk = symfun::binom(n, k);
    const double cnk1 = symfun::binom(n, k + 1);
    const Eigen::VectorXd hk = geom::mean_curvature_k(tr, k);
    const auto bg = solver::boundary_gradient(sol);
    const double R = bg.R;

    const double int_lp = detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
        return pfun::node_algebra(s.hess, k).lp();
    });
    const double d1 = detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
        return 1.0 - pfun::node_algebra(s.hess, k).e[k + 1] / cnk1;
    });
    const double int_gk1 = detail::boundary_integral(
        sol, [&](const geom::BoundarySample&, double g) { return std::pow(g, k + 1); });
    const double int_g = detail::boundary_integral(
        sol, [&](const geom::BoundarySample&, double g) { return g; });
    const double d2 = int_gk1 / std::pow(R, k) - int_g;

    int bi = 0;
    const double rhs = detail::boundary_integral(sol, [&](const geom::BoundarySample&, double g) {
        return (1.0 / std::pow(R, k) - hk[bi++]) * std::pow(g, k + 1);
    });

    SbtResult out;
    out.deficits = {d1, d2};
    out.main = make_report("sbt_fundamental",
                           {{"binom^{-1} int L[P]", int_lp / cnk},
                            {"k D1", k * d1},
                            {"D2", d2}},
                           {{"int (1/R^k - H_k)|grad u|^{k+1}", rhs}}, tol);
    bi = 0;
    const double rhs_var = detail::boundary_integral(
        sol, [&](const geom::BoundarySample&, double g) {
            return (1.0 - hk[bi++] * std::pow(g, k)) * g;
        });
    out.variant = make_report("sbt_overdetermined_variant",
                              {{"binom^{-1} int L[P]", int_lp / cnk}, {"k D1", k * d1}},
                              {{"int (1 - H_k |grad u|^k)|grad u|", rhs_var}}, tol);
    return out;
}

struct DishReport {
    double lhs = 0.0;    // binom^{-1} (2/k) int (-u) L[|grad h|^2/2]
    double mid = 0.0;    // boundary form it is dominated by
    double upper = 0.0;  // W_k R^k (2R + d(k+2)) delta
    double delta = 0.0;  // uniform deviation || |grad u| - R ||_inf
    double mid_term1 = 0.0, mid_term2 = 0.0;
    double tol = 0.0;
    bool lhs_le_mid = false, mid_le_upper = false;

    [[nodiscard]] bool pass() const { return lhs_le_mid && mid_le_upper; }
};

/// Inequality chain: the weighted Hessian energy of h is dominated by the
/// boundary deviation form, which the uniform deficit bounds from above:
///   binom^{-1}(2/k) int (-u) L[|grad h|^2/2]
///     <= (1/n) int H_{k-1}|grad u|^{k+1}(|grad u| - <x,nu>)
///        + (M^2/n) int (H_{k-2}|grad u|^{k-1} - <x,nu>)
///     <= W_k R^k [2R + d(k+2)] delta.
/// For k = 1 the added term is 2 int (-u)[S_0/binom(n,0) - 1] = 0, so the
/// second middle term vanishes identically.
[[nodiscard]] inline DishReport dish_inequality(const solver::Solution& sol,
                                                const geom::DomainConstants& dc, double tol)
{
    const int n = sol.dim();
    const int k = sol.hessian_order();
    const auto& tr = sol.trace();
    const double cnk = symfun::binom(n, k);
    const auto bg = solver::boundary_gradient(sol);

    DishReport rep;
    rep.tol = tol;
    rep.lhs = (2.0 / k) / cnk * detail::volume_integral(sol, [&](const solver::VolumeSample& s) {
                  return -s.u * pfun::node_algebra(s.hess, k).lgradh2();
              });

    const Eigen::VectorXd hk1 = geom::mean_curvature_k(tr, k - 1);
    int bi = 0;
    rep.mid_term1 = detail::boundary_integral(sol, [&](const geom::BoundarySample& s, double g) {
                        return hk1[bi++] * std::pow(g, k + 1) *
                               (g - detail::support_origin(s, tr.center));
                    }) /
                    n;
    if (k >= 2) {
        const Eigen::VectorXd hk2 = geom::mean_curvature_k(tr, k - 2);
        bi = 0;
        rep.mid_term2 =
            bg.M * bg.M *
            detail::boundary_integral(sol, [&](const geom::BoundarySample& s, double g) {
                return hk2[bi++] * std::pow(g, k - 1) - detail::support_origin(s, tr.center);
            }) /
            n;
    }
    rep.mid = rep.mid_term1 + rep.mid_term2;

    double delta = 0.0;
    for (double g : bg.grad_mag) delta = std::max(delta, std::abs(g - bg.R));
    rep.delta = delta;
    const double wk = geom::quermassintegral(tr, k);
    rep.upper = wk * std::pow(bg.R, k) * (2.0 * bg.R + dc.diameter * (k + 2.0)) * delta;

    rep.lhs_le_mid = rep.lhs <= rep.mid + tol;
    rep.mid_le_upper = rep.mid <= rep.upper + tol;
    return rep;
}

/// Pointwise integrand of D1 after Newton's inequality:
///   (S_k/binom(n,k))^{(k+1)/k} - S_{k+1}/binom(n,k+1) >= 0 on Gamma_{k+1}.
[[nodiscard]] inline double d1_integrand(const Eigen::VectorXd& lambda, int k)
{
    const int n = static_cast<int>(lambda.size());
    const Eigen::VectorXd e = symfun::elementary_symmetric_all(lambda);
    const double a = e[k] / symfun::binom(n, k);
    if (a < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::pow(a, (k + 1.0) / k) - e[k + 1] / symfun::binom(n, k + 1);
}

}  // namespace khess::identities
