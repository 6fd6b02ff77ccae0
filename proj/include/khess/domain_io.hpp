#pragma once

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>

#include "khess/geometry.hpp"

namespace khess::io {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Domain description file, schema 1:
/// {
///   "schema": 1,
///   "kind": "ball" | "curve2d" | "revolution3d",
///   "n": <int>,
///   "center": [..n..],
///   "fourier_cos": [c0, c1, ...],
///   "fourier_sin": [s1, ...],            // optional, empty for cosine-only
///   "name": "...", "eps": <number>       // optional metadata
/// }
/// Unknown keys are rejected.
struct DomainFile {
    geom::StarDomain domain;
    std::string name;
    std::optional<double> eps;
};

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional, const std::string& what)
{
    for (const char* k : required) {
        if (!j.contains(k)) throw ConfigError(what + ": missing key '" + k + "'");
    }
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : required) known = known || key == k;
        for (const char* k : optional) known = known || key == k;
        if (!known) throw ConfigError(what + ": unknown key '" + key + "'");
    }
}

inline Eigen::VectorXd to_vector(const nlohmann::json& j)
{
    Eigen::VectorXd v(static_cast<int>(j.size()));
    int i = 0;
    for (const auto& x : j) v[i++] = x.get<double>();
    return v;
}

inline nlohmann::json from_vector(const Eigen::VectorXd& v)
{
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

}  // namespace detail

[[nodiscard]] inline DomainFile parse_domain(const nlohmann::json& j, const std::string& what)
{
    detail::require_keys(j, {"schema", "kind", "n", "center", "fourier_cos"},
                         {"fourier_sin", "name", "eps"}, what);
    if (j["schema"].get<int>() != 1) throw ConfigError(what + ": unsupported schema");
    DomainFile out;
    geom::StarDomain& d = out.domain;
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "ball") {
        d.kind = geom::DomainKind::ball;
    } else if (kind == "curve2d") {
        d.kind = geom::DomainKind::curve2d;
    } else if (kind == "revolution3d") {
        d.kind = geom::DomainKind::revolution3d;
    } else {
        throw ConfigError(what + ": unknown kind '" + kind + "'");
    }
    d.n = j["n"].get<int>();
    d.center = detail::to_vector(j["center"]);
    d.profile.cos_coef = detail::to_vector(j["fourier_cos"]);
    if (j.contains("fourier_sin")) d.profile.sin_coef = detail::to_vector(j["fourier_sin"]);
    if (j.contains("name")) out.name = j["name"].get<std::string>();
    if (j.contains("eps")) out.eps = j["eps"].get<double>();
    try {
        d.validate();
    } catch (const std::exception& e) {
        throw ConfigError(what + ": invalid domain: " + e.what());
    }
    return out;
}

[[nodiscard]] inline DomainFile load_domain(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open domain file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("domain file '" + path + "': " + e.what());
    }
    return parse_domain(j, path);
}

[[nodiscard]] inline nlohmann::json domain_to_json(const geom::StarDomain& d,
                                                   const std::string& name = "",
                                                   std::optional<double> eps = std::nullopt)
{
    nlohmann::json j;
    j["schema"] = 1;
    switch (d.kind) {
        case geom::DomainKind::ball: j["kind"] = "ball"; break;
        case geom::DomainKind::curve2d: j["kind"] = "curve2d"; break;
        case geom::DomainKind::revolution3d: j["kind"] = "revolution3d"; break;
    }
    j["n"] = d.n;
    j["center"] = detail::from_vector(d.center);
    j["fourier_cos"] = detail::from_vector(d.profile.cos_coef);
    if (d.profile.sin_coef.size()) j["fourier_sin"] = detail::from_vector(d.profile.sin_coef);
    if (!name.empty()) j["name"] = name;
    if (eps) j["eps"] = *eps;
    return j;
}

inline void save_domain(const geom::StarDomain& d, const std::string& path,
                        const std::string& name = "", std::optional<double> eps = std::nullopt)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write domain file '" + path + "'");
    out << domain_to_json(d, name, eps).dump(2) << "\n";
}

}  // namespace khess::io
