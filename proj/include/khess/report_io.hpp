#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "khess/domain_io.hpp"
#include "khess/identities.hpp"
#include "khess/solver.hpp"
#include "khess/stability.hpp"

namespace khess::io {

/// 17 significant digits: enough for double round trips through text.
[[nodiscard]] inline std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[nodiscard]] inline std::string iso8601_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

/// Wrap a payload with the metadata block (the only place a timestamp may
/// appear, so artifacts stay byte-comparable modulo "meta").
[[nodiscard]] inline nlohmann::json with_meta(nlohmann::json payload)
{
    payload["meta"] = {{"timestamp", iso8601_now()}, {"tool", "khess"}};
    return payload;
}

inline void write_json(const nlohmann::json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

[[nodiscard]] inline nlohmann::json identity_report_to_json(const identities::IdentityReport& r)
{
    nlohmann::json j;
    j["name"] = r.name;
    j["lhs"] = nlohmann::json::array();
    for (const auto& t : r.lhs) j["lhs"].push_back({{"name", t.name}, {"value", t.value}});
    j["rhs"] = nlohmann::json::array();
    for (const auto& t : r.rhs) j["rhs"].push_back({{"name", t.name}, {"value", t.value}});
    j["residual"] = r.residual;
    j["rel_residual"] = r.rel_residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    return j;
}

/// One CSV row per identity report: name, lhs, rhs, residual, rel_residual, pass.
inline void write_identity_csv(const std::vector<identities::IdentityReport>& reports,
                               const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "name,lhs,rhs,residual,rel_residual,pass\n";
    for (const auto& r : reports) {
        out << r.name << ',' << fmt17(r.lhs_total()) << ',' << fmt17(r.rhs_total()) << ','
            << fmt17(r.residual) << ',' << fmt17(r.rel_residual) << ',' << (r.pass ? 1 : 0)
            << "\n";
    }
}

inline constexpr const char* kSweepCsvHeader =
    "shape_id,eps,k,delta_serrin,delta_sbt,rho_gap,l2_aniso,R,Rhat,M,r_i,d,fit_C,fit_slope";

inline void write_sweep_csv(const std::vector<stability::SweepRecord>& records,
                            const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << kSweepCsvHeader << "\n";
    for (const auto& r : records) {
        out << r.shape_id << ',' << fmt17(r.eps) << ',' << r.k << ',' << fmt17(r.delta_serrin)
            << ',' << fmt17(r.delta_sbt) << ',' << fmt17(r.rho_gap) << ',' << fmt17(r.l2_aniso)
            << ',' << fmt17(r.R) << ',' << fmt17(r.Rhat) << ',' << fmt17(r.M) << ','
            << fmt17(r.r_i) << ',' << fmt17(r.d) << ',' << fmt17(r.fit_C) << ','
            << fmt17(r.fit_slope) << "\n";
    }
}

[[nodiscard]] inline std::vector<stability::SweepRecord> read_sweep_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader) {
        throw ConfigError("sweep csv '" + path + "': bad header");
    }
    std::vector<stability::SweepRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        size_t pos = 0;
        while (true) {
            const size_t c = line.find(',', pos);
            f.push_back(line.substr(pos, c == std::string::npos ? c : c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        if (f.size() != 14) throw ConfigError("sweep csv '" + path + "': bad row");
        stability::SweepRecord r;
        r.shape_id = f[0];
        r.eps = std::strtod(f[1].c_str(), nullptr);
        r.k = std::atoi(f[2].c_str());
        r.delta_serrin = std::strtod(f[3].c_str(), nullptr);
        r.delta_sbt = std::strtod(f[4].c_str(), nullptr);
        r.rho_gap = std::strtod(f[5].c_str(), nullptr);
        r.l2_aniso = std::strtod(f[6].c_str(), nullptr);
        r.R = std::strtod(f[7].c_str(), nullptr);
        r.Rhat = std::strtod(f[8].c_str(), nullptr);
        r.M = std::strtod(f[9].c_str(), nullptr);
        r.r_i = std::strtod(f[10].c_str(), nullptr);
        r.d = std::strtod(f[11].c_str(), nullptr);
        r.fit_C = std::strtod(f[12].c_str(), nullptr);
        r.fit_slope = std::strtod(f[13].c_str(), nullptr);
        out.push_back(std::move(r));
    }
    return out;
}

[[nodiscard]] inline nlohmann::json bubbling_report_to_json(const stability::BubblingReport& r)
{
    nlohmann::json j;
    j["schema"] = 1;
    j["m"] = r.m;
    j["centers"] = nlohmann::json::array();
    for (const auto& c : r.centers) j["centers"].push_back({c[0], c[1]});
    j["Rhat"] = r.Rhat;
    j["alpha"] = r.alpha;
    j["scale"] = r.scale;
    j["symdiff"] = r.symdiff;
    j["symdiff_sampling_error"] = r.symdiff_sampling_error;
    j["boundary_gap"] = r.boundary_gap;
    j["perimeter_gap"] = r.perimeter_gap;
    j["m_bound"] = r.m_bound;
    j["delta_sbt"] = r.delta_sbt;
    j["min_hk"] = r.min_hk;
    j["volume"] = r.volume;
    j["min_center_separation"] = r.min_center_separation;
    return j;
}

/// Grid dump: {schema, h, bbox, nx, ny, node_mask (0 exterior / 1 unknown /
/// 2 eliminated), u at interior nodes in flat order}.
[[nodiscard]] inline nlohmann::json solution_dump_to_json(const solver::GridSolution& sol)
{
    const auto& G = sol.grid();
    nlohmann::json j;
    j["schema"] = 1;
    j["h"] = G.h();
    j["bbox"] = {G.lo()[0], G.lo()[1], G.lo()[0] + (G.nx() - 1) * G.h(),
                 G.lo()[1] + (G.ny() - 1) * G.h()};
    j["nx"] = G.nx();
    j["ny"] = G.ny();
    std::string mask(static_cast<size_t>(G.nx()) * G.ny(), '0');
    nlohmann::json u = nlohmann::json::array();
    for (int f = 0; f < G.nx() * G.ny(); ++f) {
        if (!G.interior(f)) continue;
        mask[static_cast<size_t>(f)] = G.eliminated(f) ? '2' : '1';
        u.push_back(G.value(sol.values(), f));
    }
    j["node_mask"] = mask;
    j["u"] = std::move(u);
    j["k"] = sol.hessian_order();
    j["max_residual"] = sol.max_residual();
    return j;
}

}  // namespace khess::io
