#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "khess/pfunction.hpp"
#include "khess/shapes.hpp"
#include "khess/solution.hpp"
#include "khess/solver.hpp"

using namespace khess;
using Catch::Approx;

TEST_CASE("apply_L on reference fields")
{
    const auto dom = shapes::make_ellipse(2.0, 1.0);
    const auto sol = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
    const auto& G = sol.grid();

    SECTION("L[u] = k S_k (Euler identity)")
    {
        pfun::ScalarField uf;
        uf.nodal = [&](int flat) { return G.value(sol.values(), flat); };
        uf.boundary = [](const Eigen::Vector2d&) { return 0.0; };
        const Eigen::VectorXd lu = pfun::apply_L(sol, uf);
        for (size_t q = 0; q < sol.nodes().size(); ++q) {
            if (!sol.nodes()[q].core) continue;
            CHECK(lu[static_cast<int>(q)] == Approx(2.0).margin(1e-7));  // k S_k = 2*1
        }
    }
    SECTION("L[const] = 0")
    {
        pfun::ScalarField cf;
        cf.nodal = [](int) { return 3.25; };
        cf.boundary = [](const Eigen::Vector2d&) { return 3.25; };
        const Eigen::VectorXd lc = pfun::apply_L(sol, cf);
        CHECK(lc.cwiseAbs().maxCoeff() < 1e-8);
    }
    SECTION("L[q] = trace(S_k^{ij}) = 2.5 on the k=2 ellipse")
    {
        pfun::ScalarField qf;
        qf.nodal = [&](int flat) { return 0.5 * G.point(flat).squaredNorm(); };
        qf.boundary = [](const Eigen::Vector2d& x) { return 0.5 * x.squaredNorm(); };
        const Eigen::VectorXd lq = pfun::apply_L(sol, qf);
        for (size_t q = 0; q < sol.nodes().size(); ++q) {
            CHECK(lq[static_cast<int>(q)] == Approx(2.5).margin(2e-6));
        }
    }
}

TEST_CASE("L[P] closed forms")
{
    SECTION("ball: identically zero for several (n,k)")
    {
        for (int n = 2; n <= 5; ++n) {
            for (int k = 1; k <= n; ++k) {
                const auto sol = solver::solve_radial(n, k, 1.2);
                const auto pf = pfun::lp_field(sol);
                CHECK(std::abs(pf.min_LP) < 1e-12);
                CHECK(std::abs(pf.max_LP) < 1e-12);
            }
        }
    }
    SECTION("analytic ellipse fixtures: 18/25 (k=1) and 1/2 (k=2)")
    {
        const auto f1 = solver::ellipse_fixture(2.0, 1.0, 1);
        const auto pf1 = pfun::lp_field(f1);
        CHECK(pf1.min_LP == Approx(0.72).margin(1e-12));
        CHECK(pf1.max_LP == Approx(0.72).margin(1e-12));

        const auto f2 = solver::ellipse_fixture(2.0, 1.0, 2);
        const auto pf2 = pfun::lp_field(f2);
        CHECK(pf2.min_LP == Approx(0.5).margin(1e-12));
        CHECK(pf2.max_LP == Approx(0.5).margin(1e-12));
    }
    SECTION("FD solutions reproduce the closed forms and stay consistent")
    {
        const auto dom = shapes::make_ellipse(2.0, 1.0);
        const auto s1 = solver::solve_hessian_2d(dom, 1, 1.0 / 32.0);
        const auto pf1 = pfun::lp_field(s1);
        CHECK(pf1.min_LP == Approx(0.72).margin(1e-6));
        CHECK(pf1.max_LP == Approx(0.72).margin(1e-6));
        CHECK(pf1.consistent);

        const auto s2 = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
        const auto pf2 = pfun::lp_field(s2);
        CHECK(pf2.min_LP == Approx(0.5).margin(1e-6));
        CHECK(pf2.consistent);
    }
    SECTION("closed form equals the diagonal-frame contraction")
    {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> u(0.05, 2.5);
        for (int trial = 0; trial < 500; ++trial) {
            const int n = 2 + trial % 5;
            Eigen::VectorXd lam(n);
            for (int i = 0; i < n; ++i) lam[i] = u(rng);
            Eigen::MatrixXd H = lam.asDiagonal();
            for (int k = 1; k <= n; ++k) {
                const auto a = pfun::node_algebra(H, k);
                CHECK(a.lp() == Approx(a.lp_contraction()).margin(1e-10 * (1.0 + std::abs(a.lp()))));
            }
        }
    }
}

TEST_CASE("ellipticity bounds")
{
    SECTION("ball: lambda = Lambda = binom(n-1,k-1)")
    {
        for (int n = 2; n <= 5; ++n) {
            for (int k = 1; k <= n; ++k) {
                const auto sol = solver::solve_radial(n, k, 0.9);
                const auto [lo, hi] = pfun::ellipticity_bounds(sol);
                CHECK(lo == Approx(symfun::binom(n - 1, k - 1)));
                CHECK(hi == Approx(symfun::binom(n - 1, k - 1)));
            }
        }
    }
    SECTION("ellipse fixtures")
    {
        const auto f2 = solver::ellipse_fixture(2.0, 1.0, 2);
        const auto [lo2, hi2] = pfun::ellipticity_bounds(f2);
        CHECK(lo2 == Approx(0.5));
        CHECK(hi2 == Approx(2.0));
        const auto f1 = solver::ellipse_fixture(2.0, 1.0, 1);
        const auto [lo1, hi1] = pfun::ellipticity_bounds(f1);
        CHECK(lo1 == Approx(1.0));
        CHECK(hi1 == Approx(1.0));
        CHECK(lo1 > 0.0);
        CHECK(lo1 <= hi1);
    }
}

TEST_CASE("h identities")
{
    SECTION("ball: both sides vanish via the binomial identity")
    {
        const auto sol = solver::solve_radial(3, 2, 1.0);
        const auto rep = pfun::h_identities(sol, sol.min_point().z);
        CHECK(rep.max_residual_i < 1e-12);
        CHECK(rep.max_residual_ii < 1e-12);
        CHECK(rep.pass);
        // (n-k+1) binom(n,k-1) = k binom(n,k) makes L[h] = 0 on the ball
        CHECK((3 - 2 + 1) * symfun::binom(3, 1) == Approx(2 * symfun::binom(3, 2)));
    }
    SECTION("ellipse k=2: L[h] = 0.5 and the stencil matches")
    {
        const auto dom = shapes::make_ellipse(2.0, 1.0);
        const auto sol = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
        const auto mp = sol.min_point();
        const auto rep = pfun::h_identities(sol, mp.z);
        CHECK(rep.pass);
        CHECK(rep.max_residual_i < 1e-9);
        CHECK(rep.max_residual_i_stencil < 1e-6);
        // L[h] value itself
        const auto a = pfun::node_algebra(sol.nodes()[0].hess, 2);
        CHECK(a.lh() == Approx(0.5).margin(1e-7));
        // (ii) with the closed forms: L[|grad h|^2/2] = 1 = 0.5 + 0.5
        CHECK(a.lgradh2() == Approx(1.0).margin(1e-7));
        CHECK(a.lh() + a.lp() == Approx(1.0).margin(1e-7));
    }
    SECTION("k=1: L[h] vanishes on exact solutions")
    {
        const auto f1 = solver::ellipse_fixture(2.0, 1.0, 1);
        for (const auto& s : f1.volume_samples()) {
            CHECK(pfun::node_algebra(s.hess, 1).lh() == Approx(0.0).margin(1e-12));
        }
    }
}
