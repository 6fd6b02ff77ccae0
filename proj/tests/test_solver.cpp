#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "khess/shapes.hpp"
#include "khess/solution.hpp"
#include "khess/solver.hpp"

using namespace khess;
using Catch::Approx;

namespace {

/// Max nodal error of a grid solution against a closed-form reference.
double max_node_error(const solver::GridSolution& sol,
                      const std::function<double(const Eigen::Vector2d&)>& exact)
{
    double err = 0.0;
    for (const auto& nd : sol.nodes()) err = std::max(err, std::abs(nd.u - exact(nd.x)));
    return err;
}

}  // namespace

TEST_CASE("radial solution")
{
    SECTION("u(0) = -R^2/2 and the PDE holds at random radii")
    {
        const auto sol = solver::solve_radial(3, 2, 1.0);
        CHECK(sol.u(0.0) == Approx(-0.5));
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int n = 2; n <= 5; ++n) {
            for (int k = 1; k <= n; ++k) {
                const auto s = solver::solve_radial(n, k, 0.5 + u01(rng));
                for (int t = 0; t < 100; ++t) {
                    // D^2 u = I independent of the radius; evaluate through the samples
                    const auto& smp = s.volume_samples()[t % s.volume_samples().size()];
                    const double sk = symfun::sk_of_matrix(smp.hess, k);
                    CHECK(std::abs(sk - symfun::binom(n, k)) < 1e-12);
                }
            }
        }
    }
    SECTION("boundary gradient is R and the uniform deficit vanishes")
    {
        const auto sol = solver::solve_radial(4, 3, 1.7);
        const auto bg = solver::boundary_gradient(sol);
        CHECK(bg.R == Approx(1.7));
        CHECK(bg.Rhat == Approx(1.7));
        double delta = 0.0;
        for (double g : bg.grad_mag) delta = std::max(delta, std::abs(g - bg.R));
        CHECK(delta < 1e-14);
    }
}

TEST_CASE("finite-difference solver on the disk matches the radial solution")
{
    const auto disk = geom::make_ball(2, 1.0);
    for (int k : {1, 2}) {
        const auto sol = solver::solve_hessian_2d(disk, k, 1.0 / 32.0);
        const double err =
            max_node_error(sol, [](const Eigen::Vector2d& x) { return 0.5 * (x.squaredNorm() - 1.0); });
        INFO("k = " << k);
        CHECK(err < 1e-8);  // Shortley-Weller stencils are exact on quadratics
        CHECK(sol.max_residual() <= 1e-9);
    }
}

TEST_CASE("quadratic recovery on the 2:1 ellipse")
{
    const auto dom = shapes::make_ellipse(2.0, 1.0);
    SECTION("k=1: u = (4/5)(x^2/4 + y^2 - 1)")
    {
        const auto sol = solver::solve_hessian_2d(dom, 1, 1.0 / 32.0);
        const double err = max_node_error(sol, [](const Eigen::Vector2d& x) {
            return 0.8 * (0.25 * x[0] * x[0] + x[1] * x[1] - 1.0);
        });
        CHECK(err < 1e-6);
    }
    SECTION("k=2: u = x^2/4 + y^2 - 1")
    {
        const auto sol = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
        const double err = max_node_error(sol, [](const Eigen::Vector2d& x) {
            return 0.25 * x[0] * x[0] + x[1] * x[1] - 1.0;
        });
        CHECK(err < 1e-6);
        // Gamma_2 at every node
        for (const auto& nd : sol.nodes()) {
            CHECK(symfun::gamma_k_member(nd.hess, 2));
        }
    }
}

TEST_CASE("boundary gradient extraction")
{
    const auto dom = shapes::make_ellipse(2.0, 1.0);
    SECTION("k=2: |grad u| = |(x/2, 2y)| on the boundary")
    {
        const auto sol = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
        const auto& tr = sol.trace();
        const auto& bg = sol.boundary_grad();
        for (size_t i = 0; i < tr.samples.size(); ++i) {
            const Eigen::Vector2d x = tr.samples[i].x.head<2>();
            const double want = Eigen::Vector2d(0.5 * x[0], 2.0 * x[1]).norm();
            CHECK(bg[i] == Approx(want).margin(2e-6));
        }
    }
    SECTION("k=1: range [4/5, 8/5] and R >= Rhat")
    {
        const auto sol = solver::solve_hessian_2d(dom, 1, 1.0 / 32.0);
        const auto bg = solver::boundary_gradient(sol);
        for (double g : bg.grad_mag) {
            CHECK(g > 0.8 - 1e-5);
            CHECK(g < 1.6 + 1e-5);
        }
        CHECK(bg.R >= bg.Rhat - 1e-4);
    }
}

TEST_CASE("manufactured solution convergence order on disk fixtures")
{
    // S_k(D^2 u) for u = exp(r^2/2) is non-polynomial, so the truncation
    // error shows the genuine order of the scheme.
    const auto disk = geom::make_ball(2, 1.0);
    auto u_ms = [](const Eigen::Vector2d& x) { return std::exp(0.5 * x.squaredNorm()); };
    auto f1 = [](const Eigen::Vector2d& x) {
        return std::exp(0.5 * x.squaredNorm()) * (2.0 + x.squaredNorm());
    };
    auto f2 = [](const Eigen::Vector2d& x) {
        return std::exp(x.squaredNorm()) * (1.0 + x.squaredNorm());
    };
    for (int k : {1, 2}) {
        double errs[2];
        for (int lev = 0; lev < 2; ++lev) {
            const double h = lev == 0 ? 1.0 / 24.0 : 1.0 / 48.0;
            solver::GridSolution lin = solver::solve_hessian_2d_general(disk, 1, h, f1, u_ms);
            if (k == 1) {
                errs[lev] = max_node_error(lin, u_ms);
            } else {
                const auto sol =
                    solver::solve_hessian_2d_general(disk, 2, h, f2, u_ms, lin.values());
                errs[lev] = max_node_error(sol, u_ms);
            }
        }
        const double order = std::log2(errs[0] / errs[1]);
        INFO("k = " << k << " errors " << errs[0] << " " << errs[1]);
        CHECK(order > 1.6);
        CHECK(order < 2.4);
    }
}

TEST_CASE("minimum point")
{
    SECTION("ball: center, u = -R^2/2")
    {
        const auto sol = solver::solve_radial(2, 1, 1.5);
        const auto mp = sol.min_point();
        CHECK(mp.z.norm() < 1e-14);
        CHECK(mp.u_min == Approx(-1.125));
        CHECK(mp.dist_boundary == Approx(1.5));
    }
    SECTION("ellipse quadratics: z = 0")
    {
        const auto dom = shapes::make_ellipse(2.0, 1.0);
        for (int k : {1, 2}) {
            const auto sol = solver::solve_hessian_2d(dom, k, 1.0 / 32.0);
            const auto mp = sol.min_point();
            CHECK(mp.z.norm() < 1e-4);
            CHECK_FALSE(mp.degenerate);
        }
    }
    SECTION("perturbed disk: z near the origin, distance bound holds")
    {
        const auto dom = shapes::make_perturbed_disk(0.1, 3);
        const auto sol = solver::solve_hessian_2d(dom, 1, 1.0 / 48.0);
        const auto mp = sol.min_point();
        CHECK(mp.z.norm() < 0.05);
        const auto dc = geom::domain_constants(dom, mp.z, 1024);
        const auto bg = solver::boundary_gradient(sol);
        CHECK(mp.dist_boundary >= dc.r_i * dc.r_i / bg.M - 1e-6);
    }
}

TEST_CASE("maximum principle checks")
{
    SECTION("ellipse k=1: all five checks pass")
    {
        const auto dom = shapes::make_ellipse(2.0, 1.0);
        const auto sol = solver::solve_hessian_2d(dom, 1, 1.0 / 32.0);
        const auto dc = geom::domain_constants(dom, Eigen::VectorXd::Zero(2), 1024);
        const auto rep = solver::max_principle_checks(sol, dc);
        CHECK(rep.all_pass());
        CHECK(rep.offending_nodes.empty());
    }
    SECTION("mild two-lobed profile within the envelope")
    {
        const auto dom = shapes::make_perturbed_disk(0.15, 2);
        for (int k : {1, 2}) {
            const auto sol = solver::solve_hessian_2d(dom, k, 1.0 / 32.0);
            const auto dc = geom::domain_constants(dom, Eigen::VectorXd::Zero(2), 1024);
            const auto rep = solver::max_principle_checks(sol, dc);
            INFO("k = " << k << " worst_a " << rep.worst_a << " worst_b " << rep.worst_b);
            CHECK(rep.all_pass());
        }
    }
}

TEST_CASE("solver guards")
{
    SECTION("envelope rejection")
    {
        const auto dumbbell = shapes::make_dumbbell(0.1);
        CHECK_THROWS_AS(solver::solve_hessian_2d(dumbbell, 1, 1.0 / 64.0), std::domain_error);
    }
    SECTION("grid must resolve the profile")
    {
        const auto dom = geom::make_ball(2, 1.0);
        CHECK_THROWS_AS(solver::solve_hessian_2d(dom, 1, 1.0 / 16.0), std::domain_error);
    }
    SECTION("determinism: identical inputs give bit-identical fields")
    {
        const auto dom = shapes::make_perturbed_disk(0.08, 3);
        const auto a = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
        const auto b = solver::solve_hessian_2d(dom, 2, 1.0 / 32.0);
        REQUIRE(a.values().size() == b.values().size());
        for (int i = 0; i < a.values().size(); ++i) {
            CHECK(a.values()[i] == b.values()[i]);
        }
    }
}
