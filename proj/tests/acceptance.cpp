// Acceptance suite: every criterion prints one PASS/FAIL line; the exit
// code is the number of failed criteria.

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "khess/identities.hpp"
#include "khess/pfunction.hpp"
#include "khess/shapes.hpp"
#include "khess/solution.hpp"
#include "khess/solver.hpp"
#include "khess/stability.hpp"

using namespace khess;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void line(int criterion, bool pass, const std::string& detail)
{
    if (!pass) ++g_failures;
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double max_node_error(const solver::GridSolution& sol,
                      const std::function<double(const Eigen::Vector2d&)>& exact)
{
    double err = 0.0;
    for (const auto& nd : sol.nodes()) err = std::max(err, std::abs(nd.u - exact(nd.x)));
    return err;
}

std::vector<stability::ShapeSpec> ellipse_family(const std::vector<double>& eps)
{
    std::vector<stability::ShapeSpec> family;
    for (double e : eps) {
        stability::ShapeSpec s;
        char id[40];
        std::snprintf(id, sizeof(id), "ellipse_eps%03d", static_cast<int>(std::lround(e * 100)));
        s.id = id;
        s.eps = e;
        s.domain = shapes::make_ellipse_family(e);
        family.push_back(std::move(s));
    }
    return family;
}

// ---------------------------------------------------------------------- 1
void criterion1_radial_exactness()
{
    const auto t0 = Clock::now();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> radii(0.3, 2.7);
    double worst = 0.0;
    bool formula_ok = true;
    for (int n = 2; n <= 5; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (int trial = 0; trial < 100; ++trial) {
                const double R = radii(rng);
                const solver::RadialSolution sol(n, k, R, 64, 16);
                const double r = 0.99 * R * (trial + 0.5) / 100.0;
                formula_ok = formula_ok && std::abs(sol.u(r) - 0.5 * (r * r - R * R)) < 1e-14;
                const double sk =
                    symfun::sk_of_matrix(Eigen::MatrixXd::Identity(n, n), k);
                worst = std::max(worst, std::abs(sk - symfun::binom(n, k)));
                for (const auto& s : sol.volume_samples()) {
                    worst = std::max(
                        worst, std::abs(symfun::sk_of_matrix(s.hess, k) - symfun::binom(n, k)));
                    break;  // hessian is constant; one sample suffices per solve
                }
            }
        }
    }
    const double dt = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "radial exactness: max |S_k - binom| = %.3e (tol 1e-12), u formula %s, %.2f s "
                  "(< 1 s)",
                  worst, formula_ok ? "exact" : "WRONG", dt);
    line(1, worst <= 1e-12 && formula_ok && dt < 1.0, buf);
}

// ---------------------------------------------------------------------- 2
void criterion2_quadratic_oracles()
{
    const auto dom = shapes::make_ellipse(2.0, 1.0);
    double err[2], solve_s[2];
    for (int k : {1, 2}) {
        const auto t0 = Clock::now();
        const auto sol = solver::solve_hessian_2d(dom, k, 1.0 / 64.0);
        solve_s[k - 1] = seconds_since(t0);
        err[k - 1] = (k == 1) ? max_node_error(sol,
                                               [](const Eigen::Vector2d& x) {
                                                   return 0.8 * (0.25 * x[0] * x[0] +
                                                                 x[1] * x[1] - 1.0);
                                               })
                              : max_node_error(sol, [](const Eigen::Vector2d& x) {
                                    return 0.25 * x[0] * x[0] + x[1] * x[1] - 1.0;
                                });
    }
    // convergence order on disk fixtures with a manufactured solution
    const auto disk = geom::make_ball(2, 1.0);
    auto u_ms = [](const Eigen::Vector2d& x) { return std::exp(0.5 * x.squaredNorm()); };
    auto f1 = [](const Eigen::Vector2d& x) {
        return std::exp(0.5 * x.squaredNorm()) * (2.0 + x.squaredNorm());
    };
    auto f2 = [](const Eigen::Vector2d& x) {
        return std::exp(x.squaredNorm()) * (1.0 + x.squaredNorm());
    };
    double order[2];
    for (int k : {1, 2}) {
        double e[2];
        for (int lev = 0; lev < 2; ++lev) {
            const double h = lev == 0 ? 1.0 / 32.0 : 1.0 / 64.0;
            const auto lin = solver::solve_hessian_2d_general(disk, 1, h, f1, u_ms);
            if (k == 1) {
                e[lev] = max_node_error(lin, u_ms);
            } else {
                const auto sol =
                    solver::solve_hessian_2d_general(disk, 2, h, f2, u_ms, lin.values());
                e[lev] = max_node_error(sol, u_ms);
            }
        }
        order[k - 1] = std::log2(e[0] / e[1]);
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "quadratic oracles: err(k=1) = %.3e, err(k=2) = %.3e (tol 1e-6 at h=1/64); "
                  "orders %.2f, %.2f (in [1.7, 2.3]); solves %.1f s, %.1f s (< 60 s)",
                  err[0], err[1], order[0], order[1], solve_s[0], solve_s[1]);
    line(2,
         err[0] <= 1e-6 && err[1] <= 1e-6 && order[0] >= 1.7 && order[0] <= 2.3 &&
             order[1] >= 1.7 && order[1] <= 2.3 && solve_s[0] < 60.0 && solve_s[1] < 60.0,
         buf);
}

// ---------------------------------------------------------------------- 3
void criterion3_identity_suite()
{
    bool ok = true;
    std::string first_fail;
    auto expect = [&](bool pass, const std::string& what) {
        if (!pass && first_fail.empty()) first_fail = what;
        ok = ok && pass;
    };

    // ellipse fixtures at 1e-6 (closed-form quadratics, both k)
    for (int k : {1, 2}) {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, k, 1024);
        identities::Polynomial f;
        f.coef = Eigen::VectorXd::Constant(1, symfun::binom(2, k));
        const auto poho = identities::pohozaev_residual(sol, f, 1e-6);
        expect(poho.general.pass && poho.simplified && poho.simplified->pass,
               "pohozaev ellipse k=" + std::to_string(k));
        const auto serrin = identities::serrin_fundamental_residual(sol, 1e-6);
        expect(serrin.pass, "serrin fundamental ellipse k=" + std::to_string(k));
        if (k == 1) {
            const auto sbt = identities::sbt_identity_residual(sol, 1e-6);
            expect(sbt.main.pass && sbt.variant.pass, "sbt identity ellipse k=1");
        }
        const auto hrep = pfun::h_identities(sol, sol.min_point().z);
        expect(hrep.max_residual_i <= 1e-9 && hrep.max_residual_ii <= 1e-9,
               "h identities ellipse k=" + std::to_string(k));
    }
    // balls at 1e-10
    for (int n : {2, 3, 4, 5}) {
        for (int k = 1; k <= n; ++k) {
            const auto sol = solver::solve_radial(n, k, 1.1);
            identities::Polynomial f;
            f.coef = Eigen::VectorXd::Constant(1, symfun::binom(n, k));
            const auto poho = identities::pohozaev_residual(sol, f, 1e-10);
            expect(poho.general.pass && poho.simplified->pass, "pohozaev ball");
            expect(identities::serrin_fundamental_residual(sol, 1e-10).pass, "serrin ball");
            if (k < n) {
                const auto sbt = identities::sbt_identity_residual(sol, 1e-10);
                expect(sbt.main.pass && sbt.variant.pass, "sbt ball");
            }
            const auto hrep = pfun::h_identities(sol, sol.min_point().z);
            expect(hrep.max_residual_i <= 1e-10 && hrep.max_residual_ii <= 1e-10,
                   "h identities ball");
        }
    }
    // L[P] closed-form values on the ellipse, analytic and FD routes
    const auto fd_dom = shapes::make_ellipse(2.0, 1.0);
    const auto lp1 = pfun::lp_field(solver::solve_hessian_2d(fd_dom, 1, 1.0 / 64.0));
    const auto lp2 = pfun::lp_field(solver::solve_hessian_2d(fd_dom, 2, 1.0 / 64.0));
    expect(std::abs(lp1.min_LP - 0.72) <= 1e-6 && std::abs(lp1.max_LP - 0.72) <= 1e-6,
           "L[P] = 18/25 (k=1)");
    expect(std::abs(lp2.min_LP - 0.5) <= 1e-6 && std::abs(lp2.max_LP - 0.5) <= 1e-6,
           "L[P] = 1/2 (k=2)");
    line(3, ok,
         ok ? "identity suite: ellipse fixtures at 1e-6, balls at 1e-10, L[P] values reproduced"
            : "identity suite: first failure at " + first_fail);
}

// ---------------------------------------------------------------------- 4
void criterion4_positivity_suite()
{
    bool ok = true;
    std::string detail;
    auto expect = [&](bool pass, const std::string& what) {
        if (!pass && detail.empty()) detail = what;
        ok = ok && pass;
    };

    // Newton chains on 1000 random Gamma_n spectra
    std::mt19937 rng(7777);
    std::uniform_real_distribution<double> unif(0.0, 4.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + trial % 7;
        Eigen::VectorXd lam(n);
        for (int i = 0; i < n; ++i) lam[i] = unif(rng);
        const auto chain = symfun::newton_chain(symfun::Spectrum(lam));
        for (int k = 0; k + 1 < n; ++k) {
            expect(chain.defined[k] && chain.defined[k + 1] &&
                       chain.terms[k] >= chain.terms[k + 1] - 1e-12 * (1.0 + chain.terms[k]),
                   "newton chain monotonicity");
        }
        for (int k = 1; k < n; ++k) {
            const double d1 = identities::d1_integrand(lam, k);
            expect(d1 >= -1e-10, "D1 integrand on random spectra");
        }
    }

    // fixtures: balls, analytic ellipses, FD solutions
    std::vector<std::unique_ptr<solver::Solution>> fixtures;
    for (int n : {2, 3, 4, 5}) {
        for (int k = 1; k <= n; ++k) {
            fixtures.push_back(std::make_unique<solver::RadialSolution>(n, k, 1.2));
        }
    }
    for (int k : {1, 2}) {
        fixtures.push_back(
            std::make_unique<solver::AnalyticSolution2D>(solver::ellipse_fixture(2.0, 1.0, k)));
        fixtures.push_back(std::make_unique<solver::GridSolution>(
            solver::solve_hessian_2d(shapes::make_ellipse(2.0, 1.0), k, 1.0 / 32.0)));
        // mode-3 perturbation: eps = 0.1 degenerates the boundary curvature
        // (kappa = 0 at the troughs), which k = 2 regularity cannot tolerate,
        // so the k = 2 member uses the strictly convex eps = 0.06
        const double eps = (k == 1) ? 0.1 : 0.06;
        fixtures.push_back(std::make_unique<solver::GridSolution>(
            solver::solve_hessian_2d(shapes::make_perturbed_disk(eps, 3), k, 1.0 / 32.0)));
    }
    for (const auto& sol : fixtures) {
        const auto pf = pfun::lp_field(*sol);
        expect(pf.min_LP >= -1e-6, "L[P] >= -1e-6 on fixtures");
        const auto [lo, hi] = pfun::ellipticity_bounds(*sol);
        expect(lo > 0.0 && lo <= hi, "ellipticity");
        // k = 1 is the equality case R = Rhat, so grid solutions only hold it
        // to the boundary-extraction accuracy
        const auto bg = solver::boundary_gradient(*sol);
        expect(bg.R >= bg.Rhat - (sol->is_grid() ? 1e-4 : 1e-9), "R >= Rhat");
        const int k = sol->hessian_order();
        if (k < sol->dim()) {
            const auto sbt = identities::sbt_identity_residual(*sol, 1.0);
            expect(sbt.deficits.d1 >= -1e-10, "D1 >= 0");
            expect(sbt.deficits.d2 >= -1e-10, "D2 >= 0");
            for (const auto& s : sol->volume_samples()) {
                const Eigen::VectorXd lam = symfun::eigenvalues_sym(s.hess);
                if (symfun::gamma_k_member_spectrum(lam, std::min(k + 1, sol->dim()))) {
                    expect(identities::d1_integrand(lam, k) >= -1e-10,
                           "D1 integrand on fixture nodes");
                }
            }
        }
    }
    line(4, ok,
         ok ? "positivity suite: L[P], D1, D2, Newton chains, ellipticity, R >= Rhat"
            : "positivity suite: first failure at " + detail);
}

// ---------------------------------------------------------------------- 5
void criterion5_serrin_sweep()
{
    const auto t0 = Clock::now();
    std::vector<double> eps;
    for (int i = 1; i <= 10; ++i) eps.push_back(0.02 * i);
    const auto family = ellipse_family(eps);
    bool ok = true;
    std::string detail;
    double slopes[2] = {0, 0}, loo[2] = {0, 0}, fitC[2] = {0, 0};
    for (int k : {1, 2}) {
        const auto res = stability::serrin_sweep(family, k, 1.0 / 64.0);
        slopes[k - 1] = res.fit_slope;
        loo[k - 1] = res.loo_slope_dev;
        fitC[k - 1] = res.fit_C;
        for (size_t i = 0; i < res.records.size(); ++i) {
            if (!res.records[i].ok) {
                ok = false;
                detail = res.records[i].shape_id + " failed: " + res.records[i].error;
                continue;
            }
            if (!res.dish[i].pass()) {
                ok = false;
                detail = res.records[i].shape_id + " chain violated";
            }
        }
        if (res.fit_slope < 0.9) {
            ok = false;
            detail = "slope " + std::to_string(res.fit_slope);
        }
        if (res.loo_slope_dev > 0.1) {
            ok = false;
            detail = "leave-one-out " + std::to_string(res.loo_slope_dev);
        }
    }
    const double ratio = fitC[1] / fitC[0];
    if (!(ratio <= 10.0 && ratio >= 0.1)) {
        ok = false;
        detail = "fitted C ratio between k=2 and k=1: " + std::to_string(ratio);
    }
    const double dt = seconds_since(t0);
    if (dt >= 900.0) {
        ok = false;
        detail = "sweep exceeded 15 min";
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "serrin sweep: slopes %.3f / %.3f (>= 0.9), loo dev %.3f / %.3f (<= 0.1), "
                  "C2/C1 = %.2f, chain ok on all members, %.0f s (< 900 s)%s%s",
                  slopes[0], slopes[1], loo[0], loo[1], ratio, dt,
                  detail.empty() ? "" : " -- ", detail.c_str());
    line(5, ok, buf);
}

// ---------------------------------------------------------------------- 6
void criterion6_sbt_sweep()
{
    bool ok = true;
    std::string detail;
    // 2D ellipses, k = 1, with the gradient bound checks
    const auto fam2d = ellipse_family({0.05, 0.1, 0.15, 0.2});
    const auto res2d =
        stability::sbt_sweep(fam2d, 1, stability::ZRule::inscribed_center, 1.0 / 64.0);
    if (res2d.chain_violation > 1e-12) {
        ok = false;
        detail = "2D chain violation";
    }
    double spread2d = res2d.fit_C_max / res2d.fit_C_min;
    if (spread2d > 10.0) {
        ok = false;
        detail = "2D fitted C spread";
    }
    if (res2d.m_bound_slack < -1e-9 || res2d.m_diam_slack < -1e-9) {
        ok = false;
        detail = "gradient bound M^2 <= 2n max(-u) <= n d^2";
    }
    // spheroid families, k in {1, 2}
    double spread3d = 0.0, chain3d = 0.0;
    for (int k : {1, 2}) {
        std::vector<stability::ShapeSpec> fam;
        for (double e : {0.05, 0.1, 0.15, 0.2}) {
            stability::ShapeSpec s;
            s.id = "spheroid_" + std::to_string(e);
            s.eps = e;
            s.domain = shapes::make_spheroid(1.0, 1.0 + e);
            fam.push_back(std::move(s));
        }
        const auto res = stability::sbt_sweep(fam, k);
        chain3d = std::max(chain3d, res.chain_violation);
        for (const auto& r : res.records) {
            if (!r.ok) {
                ok = false;
                detail = "spheroid rejected: " + r.error;
            }
        }
        spread3d = std::max(spread3d, res.fit_C_max / res.fit_C_min);
        if (res.chain_violation > 1e-12 || res.fit_C_max / res.fit_C_min > 10.0) {
            ok = false;
            detail = "spheroid chain/spread k=" + std::to_string(k);
        }
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "sbt sweep: samplewise chain violations %.1e / %.1e (<= 1e-12), fitted C "
                  "spreads %.2f / %.2f (<= 10), gradient bounds hold%s%s",
                  res2d.chain_violation, chain3d, spread2d, spread3d,
                  detail.empty() ? "" : " -- ", detail.c_str());
    line(6, ok, buf);
}

// ---------------------------------------------------------------------- 7
void criterion7_bubbling()
{
    bool ok = true;
    std::string detail;
    // the wide configuration (unit disks 2.4 apart) for the two-ball detection
    {
        const auto wide = stability::bubbling(shapes::make_dumbbell(0.1), 1);
        if (wide.m != 2 || static_cast<double>(wide.m) > wide.m_bound) {
            ok = false;
            detail = "wide dumbbell detection";
        }
    }
    // near-tangent lobes for the shrinking-neck sequence: the star hull of
    // widely separated disks keeps an O(1) tangent-cone fill, so only the
    // near-tangent family converges to the two-ball union as the neck closes
    std::vector<stability::BubblingReport> reps;
    for (double w : {0.2, 0.1, 0.05}) {
        reps.push_back(stability::bubbling(shapes::make_dumbbell(w, 1.08), 1));
        const auto& r = reps.back();
        if (r.m != 2) {
            ok = false;
            detail = "m != 2 at neck " + std::to_string(w);
        }
        if (static_cast<double>(r.m) > r.m_bound) {
            ok = false;
            detail = "count bound violated at neck " + std::to_string(w);
        }
    }
    for (size_t i = 0; i + 1 < reps.size(); ++i) {
        if (!(reps[i].symdiff > reps[i + 1].symdiff &&
              reps[i].boundary_gap > reps[i + 1].boundary_gap &&
              reps[i].perimeter_gap > reps[i + 1].perimeter_gap)) {
            ok = false;
            detail = "gaps not monotone between necks";
        }
    }
    const auto ball = stability::bubbling(geom::make_ball(2, 1.4), 1);
    if (ball.m != 1 || ball.symdiff > ball.symdiff_sampling_error ||
        ball.boundary_gap > ball.symdiff_sampling_error ||
        ball.perimeter_gap > ball.symdiff_sampling_error) {
        ok = false;
        detail = "ball control";
    }
    char buf[400];
    std::snprintf(buf, sizeof(buf),
                  "bubbling: m = {%d,%d,%d}, symdiff {%.3f,%.3f,%.3f}, boundary gap "
                  "{%.4f,%.4f,%.4f}, perimeter gap {%.3f,%.3f,%.3f}, count bounds "
                  "{%.2f,%.2f,%.2f}, ball m=%d%s%s",
                  reps[0].m, reps[1].m, reps[2].m, reps[0].symdiff, reps[1].symdiff,
                  reps[2].symdiff, reps[0].boundary_gap, reps[1].boundary_gap,
                  reps[2].boundary_gap, reps[0].perimeter_gap, reps[1].perimeter_gap,
                  reps[2].perimeter_gap, reps[0].m_bound, reps[1].m_bound, reps[2].m_bound,
                  ball.m, detail.empty() ? "" : " -- ", detail.c_str());
    line(7, ok, buf);
}

// ---------------------------------------------------------------------- 8
void criterion8_appendix_probes()
{
    bool ok = true;
    std::string detail;
    std::vector<double> r_list = {2.0, 4.0};
    std::vector<double> ratio0, ratio1, interp, bounds;
    for (double e : {0.05, 0.1, 0.15, 0.2}) {
        const auto dom = shapes::make_ellipse_family(e);
        const auto sol = solver::solve_hessian_2d(dom, 1, 1.0 / 64.0);
        const auto rep = stability::appendix_probes(sol, sol.min_point().z, r_list);
        if (!rep.applicable) {
            ok = false;
            detail = "probe not applicable on a non-ball member";
            continue;
        }
        ratio0.push_back(rep.sp_ratio[0]);
        ratio1.push_back(rep.sp_ratio[1]);
        interp.push_back(rep.interp_ratio_p_gt_n);
        bounds.push_back(rep.interp_bound_p_gt_n);
    }
    auto spread = [](const std::vector<double>& v) {
        double lo = 1e300, hi = 0.0;
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        return hi / lo;
    };
    const double s0 = spread(ratio0), s1 = spread(ratio1);
    if (s0 > 10.0 || s1 > 10.0) {
        ok = false;
        detail = "empirical ratio spread exceeds 10";
    }
    double fitted = 0.0, bound_min = 1e300;
    for (size_t i = 0; i < interp.size(); ++i) {
        fitted = std::max(fitted, interp[i]);
        bound_min = std::min(bound_min, bounds[i]);
        if (interp[i] >= bounds[i]) {
            ok = false;
            detail = "interpolation ratio above the structural bound";
        }
    }
    if (fitted >= bound_min) {
        ok = false;
        detail = "fitted interpolation constant above the family bound";
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "appendix probes: ratio spreads %.2f, %.2f (<= 10); fitted interpolation "
                  "constant %.3f below bound %.2f%s%s",
                  s0, s1, fitted, bound_min, detail.empty() ? "" : " -- ", detail.c_str());
    line(8, ok, buf);
}

}  // namespace

int main()
{
    criterion1_radial_exactness();
    criterion2_quadratic_oracles();
    criterion3_identity_suite();
    criterion4_positivity_suite();
    criterion5_serrin_sweep();
    criterion6_sbt_sweep();
    criterion7_bubbling();
    criterion8_appendix_probes();
    std::printf("%d of 8 criteria passed\n", 8 - g_failures);
    return g_failures;
}
