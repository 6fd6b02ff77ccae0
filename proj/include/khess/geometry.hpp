#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "khess/symfun.hpp"

namespace khess::geom {

inline constexpr double kPi = std::numbers::pi;

/// Volume of the unit ball in R^n.
[[nodiscard]] inline double omega_n(int n)
{
    return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Truncated Fourier series r(t) = c0 + sum_j (c_j cos(jt) + s_j sin(jt)).
struct FourierProfile {
    Eigen::VectorXd cos_coef;  // c0..cJ
    Eigen::VectorXd sin_coef;  // s1..sJ, may be empty

    [[nodiscard]] int order() const { return static_cast<int>(cos_coef.size()) - 1; }

    [[nodiscard]] double eval(double t) const { return eval_d(t, 0); }
    [[nodiscard]] double deriv(double t) const { return eval_d(t, 1); }
    [[nodiscard]] double second(double t) const { return eval_d(t, 2); }

    [[nodiscard]] double eval_d(double t, int order_deriv) const
    {
        const int J = order();
        const double c0 = std::cos(t), s0 = std::sin(t);
        double cj = 1.0, sj = 0.0;  // cos(j t), sin(j t) by angle addition
        double acc = (order_deriv == 0) ? cos_coef[0] : 0.0;
        for (int j = 1; j <= J; ++j) {
            const double c = cj * c0 - sj * s0;
            const double s = sj * c0 + cj * s0;
            cj = c;
            sj = s;
            const double sc = (sin_coef.size() >= j) ? sin_coef[j - 1] : 0.0;
            const double jd = static_cast<double>(j);
            switch (order_deriv) {
                case 0: acc += cos_coef[j] * c + sc * s; break;
                case 1: acc += jd * (-cos_coef[j] * s + sc * c); break;
                case 2: acc += jd * jd * (-cos_coef[j] * c - sc * s); break;
                default: throw std::domain_error("FourierProfile: derivative order > 2");
            }
        }
        return acc;
    }
};

enum class DomainKind { ball, curve2d, revolution3d };

/// Star-shaped domain: an exact ball in R^n, a 2D curve r(theta) with
/// 2pi-periodic profile, or a 3D surface of revolution r(phi) on [0,pi]
/// given by a cosine series (so r'(0) = r'(pi) = 0 holds identically).
struct StarDomain {
    DomainKind kind = DomainKind::ball;
    int n = 2;
    Eigen::VectorXd center;
    FourierProfile profile;

    [[nodiscard]] double radius() const
    {
        // Constant-profile radius; only meaningful for balls.
        return profile.cos_coef[0];
    }

    void validate() const
    {
        if (center.size() != n) {
            throw std::invalid_argument("StarDomain: center dimension mismatch");
        }
        switch (kind) {
            case DomainKind::ball:
                if (n < 2 || n > 8) throw std::invalid_argument("StarDomain: ball needs 2 <= n <= 8");
                if (profile.order() != 0 || profile.sin_coef.size() != 0) {
                    throw std::invalid_argument("StarDomain: ball profile must be a constant");
                }
                if (radius() <= 0.0) throw std::invalid_argument("StarDomain: ball radius must be positive");
                break;
            case DomainKind::curve2d: {
                if (n != 2) throw std::invalid_argument("StarDomain: curve2d needs n = 2");
                for (int i = 0; i < 4096; ++i) {
                    if (profile.eval(2.0 * kPi * i / 4096.0) <= 0.0) {
                        throw std::invalid_argument("StarDomain: profile must be positive");
                    }
                }
                break;
            }
            case DomainKind::revolution3d: {
                if (n != 3) throw std::invalid_argument("StarDomain: revolution3d needs n = 3");
                if (profile.sin_coef.size() != 0 && profile.sin_coef.cwiseAbs().maxCoeff() > 0.0) {
                    throw std::invalid_argument("StarDomain: revolution profile must be a cosine series");
                }
                for (int i = 0; i <= 2048; ++i) {
                    if (profile.eval(kPi * i / 2048.0) <= 0.0) {
                        throw std::invalid_argument("StarDomain: profile must be positive");
                    }
                }
                if (std::abs(profile.deriv(0.0)) > 1e-9 || std::abs(profile.deriv(kPi)) > 1e-9) {
                    throw std::invalid_argument("StarDomain: pole irregularity");
                }
                break;
            }
        }
    }
};

[[nodiscard]] inline StarDomain make_ball(int n, double R, Eigen::VectorXd center = {})
{
    StarDomain d;
    d.kind = DomainKind::ball;
    d.n = n;
    d.center = center.size() ? center : Eigen::VectorXd::Zero(n);
    d.profile.cos_coef = Eigen::VectorXd::Constant(1, R);
    d.validate();
    return d;
}

[[nodiscard]] inline StarDomain make_curve2d(Eigen::VectorXd cos_coef, Eigen::VectorXd sin_coef = {},
                                             Eigen::VectorXd center = {})
{
    StarDomain d;
    d.kind = DomainKind::curve2d;
    d.n = 2;
    d.center = center.size() ? center : Eigen::VectorXd::Zero(2);
    d.profile.cos_coef = std::move(cos_coef);
    d.profile.sin_coef = std::move(sin_coef);
    d.validate();
    return d;
}

[[nodiscard]] inline StarDomain make_revolution(Eigen::VectorXd cos_coef, Eigen::VectorXd center = {})
{
    StarDomain d;
    d.kind = DomainKind::revolution3d;
    d.n = 3;
    d.center = center.size() ? center : Eigen::VectorXd::Zero(3);
    d.profile.cos_coef = std::move(cos_coef);
    d.validate();
    return d;
}

struct BoundarySample {
    Eigen::VectorXd x;       // point in R^n
    Eigen::VectorXd normal;  // outward unit normal
    Eigen::VectorXd kappas;  // n-1 principal curvatures
    double support = 0.0;    // <x - center, normal>
    double weight = 0.0;     // surface measure carried by the sample
    double param = 0.0;      // theta (2D / ball great circle) or phi (revolution)
};

struct BoundaryTrace {
    int n = 2;
    Eigen::VectorXd center;
    std::vector<BoundarySample> samples;
    double perimeter = 0.0;
    double volume = 0.0;
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_m.
inline void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights)
{
    nodes.assign(m, 0.0);
    weights.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= m; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace detail

/// Sample the boundary with curvatures, normals and quadrature weights.
/// 2D uses the periodic trapezoid rule in theta; revolution surfaces use
/// Gauss-Legendre in phi times the 2pi parallel factor; balls carry their
/// closed-form data on a great circle.
[[nodiscard]] inline BoundaryTrace boundary_trace(const StarDomain& dom, int m)
{
    dom.validate();
    if (m < 64 || m % 2 != 0) {
        throw std::domain_error("boundary_trace: m must be even and >= 64");
    }
    BoundaryTrace tr;
    tr.n = dom.n;
    tr.center = dom.center;
    tr.samples.resize(m);

    if (dom.kind == DomainKind::ball) {
        const int n = dom.n;
        const double R = dom.radius();
        tr.perimeter = n * omega_n(n) * std::pow(R, n - 1);
        tr.volume = omega_n(n) * std::pow(R, n);
        for (int i = 0; i < m; ++i) {
            const double t = 2.0 * kPi * i / m;
            BoundarySample& s = tr.samples[i];
            s.param = t;
            Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
            dir[0] = std::cos(t);
            dir[1] = std::sin(t);
            s.x = dom.center + R * dir;
            s.normal = dir;
            s.kappas = Eigen::VectorXd::Constant(n - 1, 1.0 / R);
            s.support = R;
            s.weight = tr.perimeter / m;
        }
        return tr;
    }

    if (dom.kind == DomainKind::curve2d) {
        const double dt = 2.0 * kPi / m;
        double per = 0.0, vol = 0.0;
        for (int i = 0; i < m; ++i) {
            const double t = dt * i;
            const double r = dom.profile.eval(t);
            const double r1 = dom.profile.deriv(t);
            const double r2 = dom.profile.second(t);
            if (r <= 0.0) throw std::domain_error("boundary_trace: non-positive radius");
            const double g = std::sqrt(r * r + r1 * r1);
            const Eigen::Vector2d er(std::cos(t), std::sin(t));
            const Eigen::Vector2d et(-std::sin(t), std::cos(t));
            BoundarySample& s = tr.samples[i];
            s.param = t;
            s.x = dom.center + r * er;
            Eigen::Vector2d nu = (r * er - r1 * et) / g;
            s.normal = nu;
            const double kappa = (r * r + 2.0 * r1 * r1 - r * r2) / (g * g * g);
            s.kappas = Eigen::VectorXd::Constant(1, kappa);
            s.support = r * r / g;
            s.weight = dt * g;
            per += s.weight;
            vol += dt * 0.5 * r * r;
        }
        tr.perimeter = per;
        tr.volume = vol;
        return tr;
    }

    // revolution3d
    std::vector<double> gx, gw;
    detail::gauss_legendre(m, gx, gw);
    double per = 0.0, vol = 0.0;
    for (int i = 0; i < m; ++i) {
        const double phi = 0.5 * kPi * (gx[i] + 1.0);
        const double wphi = 0.5 * kPi * gw[i];
        const double r = dom.profile.eval(phi);
        const double r1 = dom.profile.deriv(phi);
        const double r2 = dom.profile.second(phi);
        const double g = std::sqrt(r * r + r1 * r1);
        const double sphi = std::sin(phi), cphi = std::cos(phi);
        BoundarySample& s = tr.samples[i];
        s.param = phi;
        // meridian plane theta = 0: e_r = (sin,0,cos), e_phi = (cos,0,-sin)
        s.x = dom.center + Eigen::Vector3d(r * sphi, 0.0, r * cphi);
        Eigen::Vector3d nu(r * sphi - r1 * cphi, 0.0, r * cphi + r1 * sphi);
        nu /= g;
        s.normal = nu;
        const double kap_m = (r * r + 2.0 * r1 * r1 - r * r2) / (g * g * g);
        const double kap_p = (r * sphi - r1 * cphi) / (r * sphi * g);
        s.kappas = Eigen::VectorXd(2);
        s.kappas << kap_m, kap_p;
        s.support = r * r / g;
        s.weight = wphi * 2.0 * kPi * r * sphi * g;
        per += s.weight;
        vol += wphi * (2.0 * kPi / 3.0) * r * r * r * sphi;
    }
    tr.perimeter = per;
    tr.volume = vol;
    return tr;
}

/// H_k at each trace sample: S_k of the principal curvatures over C(n-1,k).
/// H_0 = 1 by convention.
[[nodiscard]] inline Eigen::VectorXd mean_curvature_k(const BoundaryTrace& tr, int k)
{
    const int n = tr.n;
    if (k < 0 || k > n - 1) {
        throw std::domain_error("mean_curvature_k: k out of range [0,n-1]");
    }
    Eigen::VectorXd h(static_cast<int>(tr.samples.size()));
    if (k == 0) {
        h.setOnes();
        return h;
    }
    const double cnk = symfun::binom(n - 1, k);
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        h[static_cast<int>(i)] =
            symfun::elementary_symmetric_all(tr.samples[i].kappas)[k] / cnk;
    }
    return h;
}

/// Quermassintegral W_k = (1/n) int H_{k-1} dsigma, with W_0 = |Omega|.
/// (The formula extends to k = n, which appears in the stability bounds.)
[[nodiscard]] inline double quermassintegral(const BoundaryTrace& tr, int k)
{
    if (k == 0) return tr.volume;
    if (k < 0 || k > tr.n) {
        throw std::domain_error("quermassintegral: k out of range [0,n]");
    }
    const Eigen::VectorXd h = mean_curvature_k(tr, k - 1);
    double acc = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        acc += h[static_cast<int>(i)] * tr.samples[i].weight;
    }
    return acc / tr.n;
}

/// | int <x,nu> H_k dsigma - n W_k |, x measured from the domain center.
[[nodiscard]] inline double minkowski_residual(const BoundaryTrace& tr, int k)
{
    if (k < 0 || k > tr.n - 1) {
        throw std::domain_error("minkowski_residual: k out of range [0,n-1]");
    }
    const Eigen::VectorXd h = mean_curvature_k(tr, k);
    double lhs = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        lhs += tr.samples[i].support * h[static_cast<int>(i)] * tr.samples[i].weight;
    }
    return std::abs(lhs - tr.n * quermassintegral(tr, k));
}

/// Aleksandrov-Fenchel gap (W_j/omega_n)^{1/(n-j)} - (W_i/omega_n)^{1/(n-i)}
/// for 0 <= i < j < n; non-negative on convex domains, zero only on balls.
[[nodiscard]] inline double af_gap(const BoundaryTrace& tr, int i, int j)
{
    if (!(0 <= i && i < j && j < tr.n)) {
        throw std::domain_error("af_gap: need 0 <= i < j < n");
    }
    const double on = omega_n(tr.n);
    const double wi = quermassintegral(tr, i);
    const double wj = quermassintegral(tr, j);
    return std::pow(wj / on, 1.0 / (tr.n - j)) - std::pow(wi / on, 1.0 / (tr.n - i));
}

// ---------------------------------------------------------------------------
// Point membership and boundary distance
// ---------------------------------------------------------------------------

[[nodiscard]] inline bool is_inside(const StarDomain& dom, const Eigen::VectorXd& p)
{
    const Eigen::VectorXd d = p - dom.center;
    switch (dom.kind) {
        case DomainKind::ball:
            return d.norm() < dom.radius();
        case DomainKind::curve2d: {
            const double r = d.norm();
            if (r == 0.0) return true;
            return r < dom.profile.eval(std::atan2(d[1], d[0]));
        }
        case DomainKind::revolution3d: {
            const double s = std::hypot(d[0], d[1]);
            const double r = std::hypot(s, d[2]);
            if (r == 0.0) return true;
            return r < dom.profile.eval(std::atan2(s, d[2]));
        }
    }
    return false;
}

namespace detail {

/// Planar boundary polyline of the cross section: the curve itself for 2D,
/// the full meridian section (phi in [0,pi] plus its mirror) for revolution.
struct SectionCurve {
    // point gamma(t) in the section plane, centered coordinates
    std::vector<Eigen::Vector2d> pts;
    std::vector<Eigen::Vector2d> normals;  // outward, in-plane
    std::vector<double> kappas_plane;      // in-plane curvature
    std::vector<double> kappas_parallel;   // out-of-plane curvature cap (revolution)
};

[[nodiscard]] inline SectionCurve section_curve(const StarDomain& dom, int m)
{
    SectionCurve sc;
    if (dom.kind == DomainKind::ball) {
        const double R = dom.radius();
        sc.pts.reserve(m);
        for (int i = 0; i < m; ++i) {
            const double t = 2.0 * kPi * i / m;
            const Eigen::Vector2d er(std::cos(t), std::sin(t));
            sc.pts.push_back(R * er);
            sc.normals.push_back(er);
            sc.kappas_plane.push_back(1.0 / R);
            sc.kappas_parallel.push_back(1.0 / R);
        }
        return sc;
    }
    if (dom.kind == DomainKind::curve2d) {
        for (int i = 0; i < m; ++i) {
            const double t = 2.0 * kPi * i / m;
            const double r = dom.profile.eval(t);
            const double r1 = dom.profile.deriv(t);
            const double r2 = dom.profile.second(t);
            const double g = std::sqrt(r * r + r1 * r1);
            const Eigen::Vector2d er(std::cos(t), std::sin(t));
            const Eigen::Vector2d et(-std::sin(t), std::cos(t));
            sc.pts.push_back(r * er);
            sc.normals.push_back((r * er - r1 * et) / g);
            sc.kappas_plane.push_back((r * r + 2.0 * r1 * r1 - r * r2) / (g * g * g));
            sc.kappas_parallel.push_back(0.0);  // unused in 2D
        }
        return sc;
    }
    // revolution: meridian section (s, zeta), s >= 0, plus the mirrored half
    const int half = m / 2;
    for (int i = 0; i <= half; ++i) {
        const double phi = kPi * i / half;
        const double r = dom.profile.eval(phi);
        const double r1 = dom.profile.deriv(phi);
        const double r2 = dom.profile.second(phi);
        const double g = std::sqrt(r * r + r1 * r1);
        const double sphi = std::sin(phi), cphi = std::cos(phi);
        const Eigen::Vector2d pt(r * sphi, r * cphi);
        Eigen::Vector2d nu(r * sphi - r1 * cphi, r * cphi + r1 * sphi);
        nu /= g;
        const double kap_m = (r * r + 2.0 * r1 * r1 - r * r2) / (g * g * g);
        const double s = r * sphi;
        const double kap_p = (s > 1e-12) ? (r * sphi - r1 * cphi) / (s * g) : kap_m;
        sc.pts.push_back(pt);
        sc.normals.push_back(nu);
        sc.kappas_plane.push_back(kap_m);
        sc.kappas_parallel.push_back(kap_p);
    }
    for (int i = half - 1; i >= 1; --i) {  // mirror, skip duplicated poles
        Eigen::Vector2d pt = sc.pts[i];
        Eigen::Vector2d nu = sc.normals[i];
        pt[0] = -pt[0];
        nu[0] = -nu[0];
        sc.pts.push_back(pt);
        sc.normals.push_back(nu);
        sc.kappas_plane.push_back(sc.kappas_plane[i]);
        sc.kappas_parallel.push_back(sc.kappas_parallel[i]);
    }
    return sc;
}

}  // namespace detail

/// Distance from a point to the boundary (positive inside and outside).
/// Coarse scan over the boundary parameter followed by golden-section
/// refinement around the best bracket.
[[nodiscard]] inline double dist_to_boundary(const StarDomain& dom, const Eigen::VectorXd& p,
                                             int coarse = 512)
{
    if (dom.kind == DomainKind::ball) {
        return std::abs(dom.radius() - (p - dom.center).norm());
    }
    // reduce to the planar section
    Eigen::Vector2d q;
    const Eigen::VectorXd d = p - dom.center;
    const bool revolution = dom.kind == DomainKind::revolution3d;
    if (revolution) {
        q = Eigen::Vector2d(std::hypot(d[0], d[1]), d[2]);
    } else {
        q = Eigen::Vector2d(d[0], d[1]);
    }
    auto gamma = [&](double t) -> Eigen::Vector2d {
        if (revolution) {
            // t in [0, 2pi): phi = t on the right half, mirrored beyond pi
            double phi = t <= kPi ? t : 2.0 * kPi - t;
            const double r = dom.profile.eval(phi);
            const double sgn = t <= kPi ? 1.0 : -1.0;
            return {sgn * r * std::sin(phi), r * std::cos(phi)};
        }
        const double r = dom.profile.eval(t);
        return {r * std::cos(t), r * std::sin(t)};
    };
    auto f = [&](double t) { return (gamma(t) - q).squaredNorm(); };

    double best = std::numeric_limits<double>::max();
    const double dt = 2.0 * kPi / coarse;
    int besti = 0;
    for (int i = 0; i < coarse; ++i) {
        const double v = f(dt * i);
        if (v < best) {
            best = v;
            besti = i;
        }
    }
    // golden-section refine in the bracket around the best coarse node
    double a = dt * (besti - 1), b = dt * (besti + 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return std::sqrt(std::min(f1, f2));
}

/// Largest inscribed ball: coarse interior scan plus pattern-search polish.
/// Returns {radius, center}. For revolution domains the search runs in the
/// meridian half plane, which is exact by axial symmetry.
struct Inball {
    double radius = 0.0;
    Eigen::VectorXd center;
};

[[nodiscard]] inline Inball inscribed_ball(const StarDomain& dom, int scan = 96)
{
    if (dom.kind == DomainKind::ball) {
        return {dom.radius(), dom.center};
    }
    const bool revolution = dom.kind == DomainKind::revolution3d;
    auto lift = [&](const Eigen::Vector2d& q) -> Eigen::VectorXd {
        if (!revolution) {
            Eigen::VectorXd p(2);
            p << dom.center[0] + q[0], dom.center[1] + q[1];
            return p;
        }
        Eigen::VectorXd p(3);
        p << dom.center[0] + q[0], dom.center[1], dom.center[2] + q[1];
        return p;
    };
    auto dist = [&](const Eigen::Vector2d& q) -> double {
        const Eigen::VectorXd p = lift(q);
        if (!is_inside(dom, p)) return -dist_to_boundary(dom, p);
        return dist_to_boundary(dom, p);
    };
    // coarse scan in polar fractions of the profile
    double best = -1.0;
    Eigen::Vector2d bq(0, 0);
    for (int i = 0; i < scan; ++i) {
        const double t = (revolution ? kPi : 2.0 * kPi) * i / scan;
        const double r = dom.profile.eval(t);
        for (int l = 0; l < 24; ++l) {
            const double fr = (l + 0.5) / 24.0;
            Eigen::Vector2d q = revolution
                                    ? Eigen::Vector2d(fr * r * std::sin(t), fr * r * std::cos(t))
                                    : Eigen::Vector2d(fr * r * std::cos(t), fr * r * std::sin(t));
            const double v = dist(q);
            if (v > best) {
                best = v;
                bq = q;
            }
        }
    }
    // pattern search polish
    double step = 0.1 * best;
    for (int it = 0; it < 200 && step > 1e-12; ++it) {
        bool improved = false;
        for (const auto& dir : {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0),
                                Eigen::Vector2d(0, 1), Eigen::Vector2d(0, -1)}) {
            const Eigen::Vector2d q = bq + step * dir;
            const double v = dist(q);
            if (v > best) {
                best = v;
                bq = q;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    return {best, lift(bq)};
}

struct DomainConstants {
    double diameter = 0.0;
    double r_i = 0.0;
    double rho_e = 0.0;
    double rho_i = 0.0;
    double volume = 0.0;
    double perimeter = 0.0;
    double unit_ball_volume = 0.0;  // omega_n
};

/// Uniform interior sphere radius estimate: the largest ball tangent from
/// inside at each boundary sample is capped by
///   r <= |y - b|^2 / (2 <y - b, n_in>)  for boundary points y ahead of the
/// inward normal n_in, and by the local osculating radii (including the
/// parallel curvature for revolution surfaces). The estimate is the minimum
/// over samples; exact for convex analytic profiles.
[[nodiscard]] inline double interior_sphere_radius(const StarDomain& dom, int m = 1024)
{
    if (dom.kind == DomainKind::ball) return dom.radius();
    const detail::SectionCurve sc = detail::section_curve(dom, m);
    const int M = static_cast<int>(sc.pts.size());
    double r_i = std::numeric_limits<double>::max();
    for (int b = 0; b < M; ++b) {
        double cap = std::numeric_limits<double>::max();
        if (sc.kappas_plane[b] > 0.0) cap = std::min(cap, 1.0 / sc.kappas_plane[b]);
        if (dom.kind == DomainKind::revolution3d && sc.kappas_parallel[b] > 0.0) {
            cap = std::min(cap, 1.0 / sc.kappas_parallel[b]);
        }
        const Eigen::Vector2d n_in = -sc.normals[b];
        for (int y = 0; y < M; ++y) {
            if (y == b) continue;
            const Eigen::Vector2d d = sc.pts[y] - sc.pts[b];
            const double proj = d.dot(n_in);
            if (proj <= 1e-12) continue;
            cap = std::min(cap, d.squaredNorm() / (2.0 * proj));
        }
        r_i = std::min(r_i, cap);
    }
    return r_i;
}

/// Diameter, interior sphere radius, and the radial extremes of the boundary
/// seen from a given interior point z.
[[nodiscard]] inline DomainConstants domain_constants(const StarDomain& dom,
                                                      const Eigen::VectorXd& z, int m = 1024)
{
    dom.validate();
    if (!is_inside(dom, z)) {
        throw std::domain_error("domain_constants: z must lie inside the domain");
    }
    DomainConstants c;
    c.unit_ball_volume = omega_n(dom.n);
    const BoundaryTrace tr = boundary_trace(dom, m);
    c.volume = tr.volume;
    c.perimeter = tr.perimeter;

    if (dom.kind == DomainKind::ball) {
        const double R = dom.radius();
        const double off = (z - dom.center).norm();
        c.diameter = 2.0 * R;
        c.rho_e = R + off;
        c.rho_i = R - off;
        c.r_i = R;
        return c;
    }

    if (dom.kind == DomainKind::curve2d) {
        double d2 = 0.0, re = 0.0, ri = std::numeric_limits<double>::max();
        std::vector<Eigen::Vector2d> pts(tr.samples.size());
        for (size_t i = 0; i < tr.samples.size(); ++i) pts[i] = tr.samples[i].x.head<2>();
        const Eigen::Vector2d z2 = z.head<2>();
        for (size_t i = 0; i < pts.size(); ++i) {
            const double dz = (pts[i] - z2).norm();
            re = std::max(re, dz);
            ri = std::min(ri, dz);
            for (size_t j = i + 1; j < pts.size(); ++j) {
                d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
            }
        }
        c.diameter = std::sqrt(d2);
        c.rho_e = re;
        c.rho_i = ri;
    } else {
        // revolution: boundary point (s cos a, s sin a, zeta); pairwise
        // distances maximize at opposite azimuths, radial extremes from z at
        // the aligned/opposed azimuth.
        const Eigen::VectorXd dz = z - dom.center;
        const double sz = std::hypot(dz[0], dz[1]);
        double d2 = 0.0, re = 0.0, ri = std::numeric_limits<double>::max();
        std::vector<double> ss(tr.samples.size()), zz(tr.samples.size());
        for (size_t i = 0; i < tr.samples.size(); ++i) {
            const Eigen::Vector3d q = tr.samples[i].x.head<3>() - dom.center.head<3>();
            ss[i] = std::hypot(q[0], q[1]);
            zz[i] = q[2];
        }
        for (size_t i = 0; i < ss.size(); ++i) {
            const double dzz = zz[i] - dz[2];
            re = std::max(re, std::sqrt((ss[i] + sz) * (ss[i] + sz) + dzz * dzz));
            ri = std::min(ri, std::sqrt((ss[i] - sz) * (ss[i] - sz) + dzz * dzz));
            for (size_t j = i; j < ss.size(); ++j) {
                const double zij = zz[i] - zz[j];
                d2 = std::max(d2, (ss[i] + ss[j]) * (ss[i] + ss[j]) + zij * zij);
            }
        }
        c.diameter = std::sqrt(d2);
        c.rho_e = re;
        c.rho_i = ri;
    }
    c.r_i = interior_sphere_radius(dom, m);
    return c;
}

}  // namespace khess::geom
