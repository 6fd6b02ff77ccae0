#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "khess/domain_io.hpp"
#include "khess/identities.hpp"
#include "khess/pfunction.hpp"
#include "khess/report_io.hpp"
#include "khess/shapes.hpp"
#include "khess/solution.hpp"
#include "khess/solver.hpp"
#include "khess/stability.hpp"

namespace khess::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailure = 2,
    kSolverFailure = 3,
    kConfigError = 4,
};

struct RunConfig {
    std::string command;  // solve | identities | sbt | sweep | bubbling | probes
    std::vector<std::string> domains;
    int k = 1;
    double h = 1.0 / 64.0;
    int m = 512;  // boundary sample count
    std::string out_dir = ".";
    bool emit_solution = false;
    long seed = 0;  // reserved; no stochastic component is enabled by default
    std::string z_rule = "inscribed";
    std::map<std::string, double> tolerances;

    [[nodiscard]] double tol(const std::string& name, double fallback) const
    {
        const auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }
};

[[nodiscard]] inline RunConfig parse_config(const nlohmann::json& j, const std::string& what)
{
    io::detail::require_keys(
        j, {"schema", "command"},
        {"domains", "domain", "k", "h", "m", "out_dir", "emit_solution", "seed", "z_rule",
         "tolerances"},
        what);
    if (j["schema"].get<int>() != 1) throw io::ConfigError(what + ": unsupported schema");
    RunConfig c;
    c.command = j["command"].get<std::string>();
    static const std::vector<std::string> commands = {"solve",  "identities", "sbt",
                                                      "sweep",  "bubbling",   "probes"};
    if (std::find(commands.begin(), commands.end(), c.command) == commands.end()) {
        throw io::ConfigError(what + ": unknown command '" + c.command + "'");
    }
    if (j.contains("domain")) c.domains.push_back(j["domain"].get<std::string>());
    if (j.contains("domains")) {
        for (const auto& d : j["domains"]) c.domains.push_back(d.get<std::string>());
    }
    if (j.contains("k")) c.k = j["k"].get<int>();
    if (j.contains("h")) c.h = j["h"].get<double>();
    if (j.contains("m")) c.m = j["m"].get<int>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("emit_solution")) c.emit_solution = j["emit_solution"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<long>();
    if (j.contains("z_rule")) c.z_rule = j["z_rule"].get<std::string>();
    if (j.contains("tolerances")) {
        for (const auto& [key, v] : j["tolerances"].items()) {
            c.tolerances[key] = v.get<double>();
        }
    }
    if (c.k < 1) throw io::ConfigError(what + ": k must be >= 1");
    if (c.h <= 0.0) throw io::ConfigError(what + ": h must be positive");
    if (c.z_rule != "inscribed" && c.z_rule != "centroid") {
        throw io::ConfigError(what + ": z_rule must be 'inscribed' or 'centroid'");
    }
    return c;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw io::ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw io::ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(j, path);
}

[[nodiscard]] inline nlohmann::json config_to_json(const RunConfig& c)
{
    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = c.command;
    j["domains"] = c.domains;
    j["k"] = c.k;
    j["h"] = c.h;
    j["m"] = c.m;
    j["out_dir"] = c.out_dir;
    j["emit_solution"] = c.emit_solution;
    j["seed"] = c.seed;
    j["z_rule"] = c.z_rule;
    if (!c.tolerances.empty()) {
        nlohmann::json t;
        for (const auto& [key, v] : c.tolerances) t[key] = v;
        j["tolerances"] = t;
    }
    return j;
}

namespace detail {

struct CheckSink {
    std::ostream& os;
    bool all_pass = true;

    void line(bool pass, const std::string& label)
    {
        all_pass = all_pass && pass;
        os << (pass ? "[PASS] " : "[FAIL] ") << label << "\n";
    }
    void skip(const std::string& label) { os << "[SKIP] " << label << "\n"; }
};

[[nodiscard]] inline std::string stem_of(const std::string& path)
{
    return std::filesystem::path(path).stem().string();
}

/// Build the solution object for one domain: exact on balls, the 2D solver
/// on star curves.
[[nodiscard]] inline std::unique_ptr<solver::Solution> make_solution(
    const geom::StarDomain& dom, int k, double h, int m)
{
    if (k > dom.n) throw io::ConfigError("k exceeds ambient dimension");
    if (dom.kind == geom::DomainKind::ball) {
        return std::make_unique<solver::RadialSolution>(dom.n, k, dom.radius(), m);
    }
    if (dom.kind == geom::DomainKind::curve2d) {
        if (k > 2) throw io::ConfigError("k exceeds ambient dimension");
        solver::SolveOptions opt;
        opt.trace_m = m;
        return std::make_unique<solver::GridSolution>(solver::solve_hessian_2d(dom, k, h, opt));
    }
    throw io::ConfigError("command requires a ball or a 2D star curve domain");
}

}  // namespace detail

/// Execute one command. Prints one PASS/FAIL line per check; artifacts land
/// in out_dir. Returns 0 when every check passes, 2 on a check failure,
/// 3 on solver failure, 4 on configuration errors.
[[nodiscard]] inline int run(const RunConfig& cfg, std::ostream& os = std::cout)
{
    detail::CheckSink sink{os};
    try {
        std::filesystem::create_directories(cfg.out_dir);
        std::vector<io::DomainFile> domains;
        for (const auto& path : cfg.domains) domains.push_back(io::load_domain(path));
        if (domains.empty()) throw io::ConfigError("no domain files given");
        const auto out = [&](const std::string& leaf) {
            return (std::filesystem::path(cfg.out_dir) / leaf).string();
        };

        if (cfg.command == "solve") {
            for (size_t di = 0; di < domains.size(); ++di) {
                const auto& df = domains[di];
                const std::string id = detail::stem_of(cfg.domains[di]);
                auto sol = detail::make_solution(df.domain, cfg.k, cfg.h, cfg.m);
                const auto bg = solver::boundary_gradient(*sol);
                const auto mp = sol->min_point();
                const auto dc = geom::domain_constants(df.domain, mp.z, cfg.m);
                double delta = 0.0;
                for (double g : bg.grad_mag) delta = std::max(delta, std::abs(g - bg.R));
                nlohmann::json j;
                j["domain"] = cfg.domains[di];
                j["k"] = cfg.k;
                j["R"] = bg.R;
                j["Rhat"] = bg.Rhat;
                j["M"] = bg.M;
                j["delta"] = delta;
                j["z"] = {mp.z[0], mp.z[1]};
                j["u_min"] = mp.u_min;
                j["r_i"] = dc.r_i;
                j["diameter"] = dc.diameter;
                bool converged = true;
                if (sol->is_grid()) {
                    const auto& gs = static_cast<const solver::GridSolution&>(*sol);
                    j["max_residual"] = gs.max_residual();
                    converged = gs.max_residual() <= cfg.tol("solver", 1e-9);
                    const auto mpr = solver::max_principle_checks(gs, dc);
                    j["max_principle_pass"] = mpr.all_pass();
                    sink.line(mpr.all_pass(), id + ": maximum principle checks");
                    if (cfg.emit_solution) {
                        io::write_json(io::with_meta(io::solution_dump_to_json(gs)),
                                       out("solution_" + id + "_k" + std::to_string(cfg.k) +
                                           ".json"));
                    }
                }
                sink.line(converged, id + ": solve k=" + std::to_string(cfg.k));
                sink.line(bg.R >= bg.Rhat - (sol->is_grid() ? 1e-4 : 1e-9), id + ": R >= Rhat");
                io::write_json(io::with_meta(j),
                               out("solve_" + id + "_k" + std::to_string(cfg.k) + ".json"));
            }
        } else if (cfg.command == "identities") {
            std::vector<identities::IdentityReport> all;
            for (size_t di = 0; di < domains.size(); ++di) {
                const auto& df = domains[di];
                const std::string id = detail::stem_of(cfg.domains[di]);
                auto sol = detail::make_solution(df.domain, cfg.k, cfg.h, cfg.m);
                const bool exact = df.domain.kind == geom::DomainKind::ball;
                // cut-cell quadrature on grid solutions carries an O(h^2)
                // residual; closed-form ball solutions are exact
                const double tol = cfg.tol("identity", exact ? 1e-10 : 2.0 * cfg.h * cfg.h);
                identities::Polynomial f;
                f.coef = Eigen::VectorXd::Constant(1, symfun::binom(sol->dim(), cfg.k));
                const auto poho = identities::pohozaev_residual(*sol, f, tol);
                sink.line(poho.general.pass, id + ": " + poho.general.name);
                all.push_back(poho.general);
                if (poho.simplified) {
                    sink.line(poho.simplified->pass, id + ": " + poho.simplified->name);
                    all.push_back(*poho.simplified);
                }
                const auto serrin = identities::serrin_fundamental_residual(*sol, tol);
                sink.line(serrin.pass, id + ": " + serrin.name);
                all.push_back(serrin);
                if (cfg.k < sol->dim()) {
                    const auto sbt = identities::sbt_identity_residual(*sol, tol);
                    sink.line(sbt.main.pass, id + ": " + sbt.main.name);
                    sink.line(sbt.variant.pass, id + ": " + sbt.variant.name);
                    sink.line(sbt.deficits.d1 >= -1e-10, id + ": D1 >= 0");
                    sink.line(sbt.deficits.d2 >= -1e-10, id + ": D2 >= 0");
                    all.push_back(sbt.main);
                    all.push_back(sbt.variant);
                } else {
                    sink.skip(id + ": sbt_fundamental (k = n)");
                }
                const auto hrep = pfun::h_identities(*sol, sol->min_point().z);
                sink.line(hrep.pass, id + ": h identities (i),(ii)");
                const auto pf = pfun::lp_field(*sol);
                const double tol_pos =
                    exact ? pfun::kTolPosAnalytic : cfg.tol("lp_positive", pfun::kTolPosGrid);
                sink.line(pf.min_LP >= -tol_pos, id + ": L[P] >= 0");
                const auto [lo, hi] = pfun::ellipticity_bounds(*sol);
                sink.line(lo > 0.0 && lo <= hi, id + ": ellipticity 0 < lambda <= Lambda");
                nlohmann::json j;
                j["domain"] = cfg.domains[di];
                j["k"] = cfg.k;
                j["reports"] = nlohmann::json::array();
                for (const auto& r : all) j["reports"].push_back(io::identity_report_to_json(r));
                j["min_LP"] = pf.min_LP;
                j["lambda"] = lo;
                j["Lambda"] = hi;
                io::write_json(io::with_meta(j),
                               out("identities_" + id + "_k" + std::to_string(cfg.k) + ".json"));
            }
            io::write_identity_csv(all, out("identities_k" + std::to_string(cfg.k) + ".csv"));
        } else if (cfg.command == "sweep") {
            std::vector<stability::ShapeSpec> family;
            for (size_t di = 0; di < domains.size(); ++di) {
                stability::ShapeSpec s;
                s.id = domains[di].name.empty() ? detail::stem_of(cfg.domains[di])
                                                : domains[di].name;
                s.eps = domains[di].eps.value_or(static_cast<double>(di));
                s.domain = domains[di].domain;
                family.push_back(std::move(s));
            }
            const auto res =
                stability::serrin_sweep(family, cfg.k, cfg.h, cfg.tol("chain_scale", 50.0));
            for (size_t i = 0; i < res.records.size(); ++i) {
                const auto& r = res.records[i];
                if (!r.ok) {
                    sink.line(false, r.shape_id + ": " + r.error);
                    continue;
                }
                sink.line(res.dish[i].pass(), r.shape_id + ": inequality chain");
                sink.line(r.R >= r.Rhat - 1e-4, r.shape_id + ": R >= Rhat");
            }
            sink.line(res.fit_slope >= 0.9,
                      "fit slope " + io::fmt17(res.fit_slope) + " >= 0.9");
            sink.line(res.loo_slope_dev <= 0.1,
                      "leave-one-out slope deviation " + io::fmt17(res.loo_slope_dev) +
                          " <= 0.1");
            io::write_sweep_csv(res.records, out("sweep_k" + std::to_string(cfg.k) + ".csv"));
        } else if (cfg.command == "sbt") {
            std::vector<stability::ShapeSpec> family;
            for (size_t di = 0; di < domains.size(); ++di) {
                stability::ShapeSpec s;
                s.id = domains[di].name.empty() ? detail::stem_of(cfg.domains[di])
                                                : domains[di].name;
                s.eps = domains[di].eps.value_or(static_cast<double>(di));
                s.domain = domains[di].domain;
                family.push_back(std::move(s));
            }
            const auto zr = cfg.z_rule == "centroid" ? stability::ZRule::centroid
                                                     : stability::ZRule::inscribed_center;
            const auto res = stability::sbt_sweep(family, cfg.k, zr, cfg.h);
            for (const auto& r : res.records) {
                sink.line(r.ok, r.shape_id + (r.ok ? ": admitted" : ": " + r.error));
            }
            sink.line(res.chain_violation <= 1e-12, "samplewise Newton chain");
            if (res.fit_C_max > 0.0) {
                sink.line(res.fit_C_max / res.fit_C_min <= 10.0,
                          "fitted C spread " + io::fmt17(res.fit_C_max / res.fit_C_min) +
                              " <= 10");
            }
            if (res.m_bound_slack < 1e300) {
                sink.line(res.m_bound_slack >= -1e-9, "M^2 <= 2n max(-u)");
                sink.line(res.m_diam_slack >= -1e-9, "2n max(-u) <= n d^2");
            }
            io::write_sweep_csv(res.records, out("sbt_k" + std::to_string(cfg.k) + ".csv"));
        } else if (cfg.command == "bubbling") {
            for (size_t di = 0; di < domains.size(); ++di) {
                const std::string id = detail::stem_of(cfg.domains[di]);
                const auto rep = stability::bubbling(domains[di].domain, cfg.k);
                sink.line(rep.m >= 1, id + ": m = " + std::to_string(rep.m));
                sink.line(rep.m == 1 || rep.min_center_separation >= 2.0 * rep.Rhat - 1e-9,
                          id + ": centers pairwise disjoint");
                sink.line(static_cast<double>(rep.m) <= rep.m_bound,
                          id + ": m <= |Omega| / (omega_n (Rhat - gap)^n)");
                io::write_json(io::with_meta(io::bubbling_report_to_json(rep)),
                               out("bubbling_" + id + ".json"));
            }
        } else if (cfg.command == "probes") {
            for (size_t di = 0; di < domains.size(); ++di) {
                const std::string id = detail::stem_of(cfg.domains[di]);
                auto sol = detail::make_solution(domains[di].domain, cfg.k, cfg.h, cfg.m);
                if (!sol->is_grid()) {
                    sink.skip(id + ": probes need a grid solution (ball has grad h = 0)");
                    continue;
                }
                const auto& gs = static_cast<const solver::GridSolution&>(*sol);
                const auto mp = gs.min_point();
                const auto rep =
                    stability::appendix_probes(gs, mp.z, {2.0, 2.0 * gs.dim() / (gs.dim() - 1.0)});
                nlohmann::json j;
                j["domain"] = cfg.domains[di];
                j["applicable"] = rep.applicable;
                if (rep.applicable) {
                    j["r_list"] = rep.r_list;
                    j["sp_ratio"] = rep.sp_ratio;
                    j["sp_bound"] = rep.sp_bound;
                    j["interp_ratio_p_gt_n"] = rep.interp_ratio_p_gt_n;
                    j["interp_ratio_p_eq_n"] = rep.interp_ratio_p_eq_n;
                    j["interp_ratio_p_lt_n"] = rep.interp_ratio_p_lt_n;
                    j["interp_bound_p_gt_n"] = rep.interp_bound_p_gt_n;
                    j["dist_z"] = rep.dist_z;
                    j["b0"] = rep.b0;
                    sink.line(rep.interp_ratio_p_gt_n < rep.interp_bound_p_gt_n,
                              id + ": interpolation constant below the structural bound");
                } else {
                    sink.skip(id + ": probe not applicable (grad h vanishes)");
                }
                io::write_json(io::with_meta(j), out("probes_" + id + ".json"));
            }
        }
        return sink.all_pass ? kOk : kCheckFailure;
    } catch (const io::ConfigError& e) {
        os << "[ERROR] " << e.what() << "\n";
        return kConfigError;
    } catch (const solver::ConvergenceError& e) {
        os << "[ERROR] " << e.what() << "\n";
        return kSolverFailure;
    } catch (const solver::ConeError& e) {
        os << "[ERROR] " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::exception& e) {
        os << "[ERROR] " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace khess::cli
