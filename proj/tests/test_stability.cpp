#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "khess/shapes.hpp"
#include "khess/stability.hpp"

using namespace khess;
using Catch::Approx;

namespace {

std::vector<stability::ShapeSpec> ellipse_family(std::initializer_list<double> eps_list)
{
    std::vector<stability::ShapeSpec> family;
    for (double e : eps_list) {
        stability::ShapeSpec s;
        s.id = "ellipse_eps_" + std::to_string(e);
        s.eps = e;
        s.domain = shapes::make_ellipse_family(e);
        family.push_back(std::move(s));
    }
    return family;
}

}  // namespace

TEST_CASE("serrin sweep on a small area-preserving ellipse family")
{
    const auto family = ellipse_family({0.05, 0.1, 0.2});
    for (int k : {1, 2}) {
        const auto res = stability::serrin_sweep(family, k, 1.0 / 32.0);
        REQUIRE(res.records.size() == 3);
        for (size_t i = 0; i < res.records.size(); ++i) {
            const auto& r = res.records[i];
            INFO("member " << r.shape_id << " k " << k);
            REQUIRE(r.ok);
            CHECK(r.delta_serrin > 0.0);
            CHECK(r.delta_sbt >= (k == 1 ? 0.0 : -1e-12));
            CHECK(r.rho_gap > 0.0);
            CHECK(r.R >= r.Rhat - 1e-4);
            CHECK(res.dish[i].pass());
        }
        INFO("slope " << res.fit_slope);
        CHECK(res.fit_slope >= 0.9);
        CHECK(res.fit_C > 0.0);
        // deficits and detector grow together along the family
        for (size_t i = 0; i + 1 < res.records.size(); ++i) {
            CHECK(res.records[i].delta_serrin < res.records[i + 1].delta_serrin);
            CHECK(res.records[i].max_lp < res.records[i + 1].max_lp);
            CHECK(res.records[i].rho_gap < res.records[i + 1].rho_gap);
        }
    }
}

TEST_CASE("sbt geometric sweep")
{
    SECTION("2D ellipses, k=1, with the gradient bound checks")
    {
        const auto family = ellipse_family({0.05, 0.1, 0.15, 0.2});
        const auto res = stability::sbt_sweep(family, 1, stability::ZRule::inscribed_center,
                                              1.0 / 32.0);
        CHECK(res.chain_violation <= 1e-12);
        for (const auto& r : res.records) {
            REQUIRE(r.ok);
            CHECK(r.delta_sbt > 0.0);
            CHECK(r.l2_aniso > 0.0);
            CHECK(r.rho_gap >= 0.0);
        }
        CHECK(res.fit_C_max / res.fit_C_min <= 10.0);
        CHECK(res.m_bound_slack > 0.0);  // M^2 <= 2n max(-u)
        CHECK(res.m_diam_slack > 0.0);   // 2n max(-u) <= n d^2
    }
    SECTION("revolution spheroids, k in {1,2}")
    {
        std::vector<stability::ShapeSpec> family;
        for (double e : {0.05, 0.1, 0.2}) {
            stability::ShapeSpec s;
            s.id = "spheroid_" + std::to_string(e);
            s.eps = e;
            s.domain = shapes::make_spheroid(1.0, 1.0 + e);
            family.push_back(std::move(s));
        }
        for (int k : {1, 2}) {
            const auto res = stability::sbt_sweep(family, k);
            CHECK(res.chain_violation <= 1e-12);
            for (const auto& r : res.records) {
                REQUIRE(r.ok);
                CHECK(r.delta_sbt >= 0.0);
            }
        }
    }
    SECTION("ball members carry zero deficits")
    {
        std::vector<stability::ShapeSpec> family(1);
        family[0].id = "ball";
        family[0].domain = geom::make_ball(2, 1.0);
        const auto res = stability::sbt_sweep(family, 1);
        REQUIRE(res.records[0].ok);
        CHECK(res.records[0].delta_sbt <= 1e-12);
        CHECK(res.records[0].l2_aniso <= 1e-9);
    }
    SECTION("members with H_k < 0 are rejected with the offending sample")
    {
        std::vector<stability::ShapeSpec> family(1);
        family[0].id = "dumbbell";
        family[0].domain = shapes::make_dumbbell(0.1);
        const auto res = stability::sbt_sweep(family, 1);
        REQUIRE_FALSE(res.records[0].ok);
        CHECK(res.records[0].error.find("H_k < 0") != std::string::npos);
    }
}

TEST_CASE("bubbling")
{
    SECTION("ball control: m = 1, gaps at sampling error")
    {
        const auto rep = stability::bubbling(geom::make_ball(2, 1.3), 1, 1024);
        CHECK(rep.m == 1);
        CHECK(rep.symdiff <= rep.symdiff_sampling_error + 1e-12);
        CHECK(rep.boundary_gap <= 1e-9);
        CHECK(rep.perimeter_gap <= 1e-9);
        CHECK(rep.m_bound >= 1.0);
        CHECK(rep.Rhat >= 1.0);
    }
    SECTION("dumbbell: two lobes detected")
    {
        const auto rep = stability::bubbling(shapes::make_dumbbell(0.1), 1, 1024);
        CHECK(rep.m == 2);
        CHECK(rep.min_center_separation >= 2.0 * rep.Rhat - 1e-9);
        CHECK(rep.boundary_gap > 0.0);
        CHECK(rep.perimeter_gap > 0.0);
        CHECK(rep.symdiff > 0.0);
        CHECK(static_cast<double>(rep.m) <= rep.m_bound);
        // the lobe centers sit near (+-1.2, 0) in scaled coordinates
        REQUIRE(rep.centers.size() == 2);
        CHECK(std::abs(std::abs(rep.centers[0][0]) - 1.2 * rep.scale) < 0.05);
        CHECK(std::abs(rep.centers[0][1]) < 0.05);
    }
    SECTION("revolution domains rejected")
    {
        CHECK_THROWS_AS(stability::bubbling(shapes::make_spheroid(1.0, 1.2), 1),
                        std::invalid_argument);
    }
}

TEST_CASE("appendix probes")
{
    SECTION("ellipse k = 1: ratios finite, interpolation below the structural bound")
    {
        const auto dom = shapes::make_ellipse_family(0.1);
        const auto sol = solver::solve_hessian_2d(dom, 1, 1.0 / 32.0);
        const auto mp = sol.min_point();
        const auto rep = stability::appendix_probes(sol, mp.z, {2.0, 4.0});
        REQUIRE(rep.applicable);
        REQUIRE(rep.sp_ratio.size() == 2);
        for (double r : rep.sp_ratio) {
            CHECK(r > 0.0);
            CHECK(std::isfinite(r));
        }
        CHECK(rep.interp_ratio_p_gt_n > 0.0);
        CHECK(rep.interp_ratio_p_gt_n < rep.interp_bound_p_gt_n);
    }
    SECTION("ball: not applicable, grad h vanishes")
    {
        const auto sol = solver::solve_hessian_2d(geom::make_ball(2, 1.0), 1, 1.0 / 32.0);
        const auto rep = stability::appendix_probes(sol, sol.min_point().z, {2.0, 4.0});
        CHECK_FALSE(rep.applicable);
    }
}
