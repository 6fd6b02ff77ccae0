#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "khess/identities.hpp"
#include "khess/shapes.hpp"
#include "khess/solution.hpp"
#include "khess/solver.hpp"

using namespace khess;
using Catch::Approx;

namespace {

identities::Polynomial constant_rhs(int n, int k)
{
    identities::Polynomial f;
    f.coef = Eigen::VectorXd::Constant(1, symfun::binom(n, k));
    return f;
}

}  // namespace

TEST_CASE("polynomial antiderivative")
{
    identities::Polynomial f;
    f.coef = Eigen::VectorXd(3);
    f.coef << 1.0, 0.0, 1.0;  // f(u) = 1 + u^2
    CHECK(f(2.0) == Approx(5.0));
    // F(u) = -u - u^3/3; F(-2) = 2 + 8/3
    CHECK(f.big_F(-2.0) == Approx(2.0 + 8.0 / 3.0));
    CHECK(f.big_F(0.0) == 0.0);
}

TEST_CASE("Pohozaev identity")
{
    SECTION("ball: both sides equal omega_n R^{n+2}/(n+2), independent of k")
    {
        for (int n = 2; n <= 5; ++n) {
            for (int k = 1; k <= n; ++k) {
                for (double R : {0.7, 1.0, 1.3}) {
                    const auto sol = solver::solve_radial(n, k, R);
                    const auto res =
                        identities::pohozaev_residual(sol, constant_rhs(n, k), 1e-10);
                    REQUIRE(res.simplified.has_value());
                    const double want = geom::omega_n(n) * std::pow(R, n + 2) / (n + 2);
                    CHECK(res.simplified->lhs_total() == Approx(want).epsilon(1e-10));
                    CHECK(res.simplified->pass);
                    CHECK(res.general.pass);
                }
            }
        }
    }
    SECTION("ellipse k=2: int(-u) = pi and the reports pass at 1e-8")
    {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, 2, 1024);
        const auto res = identities::pohozaev_residual(sol, constant_rhs(2, 2), 1e-8);
        REQUIRE(res.simplified.has_value());
        CHECK(res.simplified->lhs[0].value == Approx(geom::kPi).epsilon(1e-9));
        CHECK(res.simplified->pass);
        CHECK(res.general.pass);
    }
    SECTION("ellipse k=1 exact quadratic: relative residual <= 1e-8")
    {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, 1, 1024);
        const auto res = identities::pohozaev_residual(sol, constant_rhs(2, 1), 1e-8);
        REQUIRE(res.simplified.has_value());
        CHECK(res.simplified->rel_residual <= 1e-8);
        CHECK(res.general.rel_residual <= 1e-8);
        // int(-u) = (4/5) pi for the k=1 quadratic
        CHECK(res.simplified->lhs[0].value == Approx(0.8 * geom::kPi).epsilon(1e-9));
    }
}

TEST_CASE("Serrin fundamental identity")
{
    SECTION("ball: every term vanishes")
    {
        for (int n : {2, 3, 4}) {
            for (int k = 1; k <= n; ++k) {
                const auto sol = solver::solve_radial(n, k, 1.1);
                const auto rep = identities::serrin_fundamental_residual(sol, 1e-10);
                CHECK(rep.pass);
                CHECK(std::abs(rep.lhs_total()) < 1e-11);
                CHECK(std::abs(rep.rhs_total()) < 1e-11);
            }
        }
    }
    SECTION("ellipse k=1: LHS = RHS = 72 pi / 125")
    {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, 1, 1024);
        const auto rep = identities::serrin_fundamental_residual(sol, 1e-8);
        const double want = 72.0 * geom::kPi / 125.0;
        CHECK(rep.lhs_total() == Approx(want).epsilon(1e-9));
        CHECK(rep.rhs_total() == Approx(want).epsilon(1e-9));
        CHECK(rep.pass);
    }
    SECTION("ellipse k=2 (= n): LHS = RHS = pi/2")
    {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, 2, 1024);
        const auto rep = identities::serrin_fundamental_residual(sol, 1e-8);
        CHECK(rep.lhs_total() == Approx(0.5 * geom::kPi).epsilon(1e-9));
        CHECK(rep.rhs_total() == Approx(0.5 * geom::kPi).epsilon(1e-9));
        CHECK(rep.pass);
    }
    SECTION("FD ellipse solutions close the identity at 1e-6")
    {
        const auto dom = shapes::make_ellipse(2.0, 1.0);
        for (int k : {1, 2}) {
            const auto sol = solver::solve_hessian_2d(dom, k, 1.0 / 32.0);
            const auto rep = identities::serrin_fundamental_residual(sol, 1e-3);
            INFO("k = " << k << " residual " << rep.residual);
            CHECK(rep.rel_residual < 1e-3);  // node-counting quadrature accuracy
        }
    }
}

TEST_CASE("higher-order soap-bubble identity")
{
    SECTION("ball: all terms zero, R = Rhat")
    {
        for (int n : {2, 3, 4}) {
            for (int k = 1; k < n; ++k) {
                const auto sol = solver::solve_radial(n, k, 1.3);
                const auto res = identities::sbt_identity_residual(sol, 1e-10);
                CHECK(res.main.pass);
                CHECK(res.variant.pass);
                CHECK(std::abs(res.deficits.d1) < 1e-10);
                CHECK(std::abs(res.deficits.d2) < 1e-10);
                const auto bg = solver::boundary_gradient(sol);
                CHECK(bg.R == Approx(bg.Rhat));
            }
        }
    }
    SECTION("ellipse k=1: D1 = 18 pi / 25 and the identity closes")
    {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, 1, 1024);
        const auto res = identities::sbt_identity_residual(sol, 1e-8);
        CHECK(res.deficits.d1 == Approx(18.0 * geom::kPi / 25.0).epsilon(1e-9));
        CHECK(res.deficits.d2 >= 1e-3);  // strict Hoelder gap, |grad u| nonconstant
        CHECK(res.main.pass);
        CHECK(res.variant.pass);
    }
    SECTION("k = n rejected")
    {
        const auto sol = solver::ellipse_fixture(2.0, 1.0, 2);
        CHECK_THROWS_AS(identities::sbt_identity_residual(sol, 1e-8), std::domain_error);
    }
    SECTION("deficit positivity integrand on random Gamma_{k+1} spectra")
    {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> u(0.0, 3.0);
        for (int trial = 0; trial < 1000; ++trial) {
            const int n = 2 + trial % 6;
            Eigen::VectorXd lam(n);
            for (int i = 0; i < n; ++i) lam[i] = u(rng);
            for (int k = 1; k < n; ++k) {
                CHECK(identities::d1_integrand(lam, k) >= -1e-10);
            }
        }
    }
}

TEST_CASE("dish inequality chain")
{
    SECTION("ball: 0 <= 0 <= 0")
    {
        const auto sol = solver::solve_radial(3, 2, 1.0);
        const auto dc = geom::domain_constants(sol.domain(), sol.domain().center);
        const auto rep = identities::dish_inequality(sol, dc, 1e-9);
        CHECK(rep.pass());
        CHECK(std::abs(rep.lhs) < 1e-11);
        CHECK(std::abs(rep.mid) < 1e-11);
        CHECK(std::abs(rep.upper) < 1e-9);
    }
    SECTION("area-preserving ellipse, analytic k=2 fixture")
    {
        const double eps = 0.1;
        const auto sol = solver::ellipse_fixture(1.0 + eps, 1.0 / (1.0 + eps), 2, 1024);
        const auto dc = geom::domain_constants(sol.domain(), Eigen::VectorXd::Zero(2), 1024);
        const auto rep = identities::dish_inequality(sol, dc, 1e-9);
        INFO("lhs " << rep.lhs << " mid " << rep.mid << " upper " << rep.upper);
        CHECK(rep.pass());
        CHECK(rep.lhs > 0.0);
        CHECK(rep.mid > 0.0);
        CHECK(rep.upper > 0.0);
        // the analytic margins: lhs ~ (pi/2)(a-b)^2, mid ~ 2x that
        CHECK(rep.lhs == Approx(0.5 * geom::kPi * std::pow((1.0 + eps) - 1.0 / (1.0 + eps), 2))
                              .epsilon(1e-6));
    }
    SECTION("FD members of the family, both k")
    {
        const double eps = 0.1;
        const auto dom = shapes::make_ellipse_family(eps);
        for (int k : {1, 2}) {
            const auto sol = solver::solve_hessian_2d(dom, k, 1.0 / 32.0);
            const auto dc = geom::domain_constants(dom, Eigen::VectorXd::Zero(2), 1024);
            const double h = 1.0 / 32.0;
            const auto rep = identities::dish_inequality(sol, dc, 50.0 * h * h);
            INFO("k " << k << " lhs " << rep.lhs << " mid " << rep.mid << " upper " << rep.upper);
            CHECK(rep.pass());
        }
    }
}

TEST_CASE("rigidity regression on the ball: R^{k+2} W_k = R^2 |Omega|")
{
    for (int n : {2, 3}) {
        for (int k = 1; k < n; ++k) {
            const auto sol = solver::solve_radial(n, k, 1.4);
            const auto bg = solver::boundary_gradient(sol);
            const auto tr = sol.trace();
            const double wk = geom::quermassintegral(tr, k);
            const double collapse =
                std::pow(bg.R, k + 2) * wk - bg.R * bg.R * tr.volume;
            CHECK(std::abs(collapse) < 1e-10 * tr.volume);
        }
    }
}
