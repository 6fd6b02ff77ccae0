#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "khess/geometry.hpp"

namespace khess::shapes {

/// Project a 2pi-periodic function onto a truncated Fourier series by the
/// trapezoid rule, optionally damping coefficient j by exp(-(j sigma)^2/2)
/// (a spectral Gaussian mollifier). Coefficients below the cutoff are
/// dropped from the tail.
[[nodiscard]] inline geom::FourierProfile project_profile(
    const std::function<double(double)>& f, int max_order, double gauss_sigma = 0.0,
    int samples = 8192, double cutoff = 1e-14)
{
    Eigen::VectorXd cc = Eigen::VectorXd::Zero(max_order + 1);
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(max_order);
    std::vector<double> fv(samples);
    for (int i = 0; i < samples; ++i) fv[i] = f(2.0 * geom::kPi * i / samples);
    for (int j = 0; j <= max_order; ++j) {
        double ac = 0.0, as = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double t = 2.0 * geom::kPi * i / samples;
            ac += fv[i] * std::cos(j * t);
            if (j >= 1) as += fv[i] * std::sin(j * t);
        }
        const double damp = gauss_sigma > 0.0 ? std::exp(-0.5 * j * j * gauss_sigma * gauss_sigma)
                                              : 1.0;
        cc[j] = (j == 0 ? 1.0 : 2.0) * ac / samples * damp;
        if (j >= 1) ss[j - 1] = 2.0 * as / samples * damp;
    }
    int keep = max_order;
    while (keep > 0 && std::abs(cc[keep]) < cutoff &&
           (keep > ss.size() || std::abs(ss[keep - 1]) < cutoff)) {
        --keep;
    }
    geom::FourierProfile p;
    p.cos_coef = cc.head(keep + 1);
    p.sin_coef = ss.head(std::min<Eigen::Index>(keep, ss.size()));
    return p;
}

/// Ellipse x^2/a^2 + y^2/b^2 = 1 as a star profile about its center.
[[nodiscard]] inline geom::StarDomain make_ellipse(double a, double b, int max_order = 128)
{
    auto rho = [=](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return a * b / std::sqrt(b * b * c * c + a * a * s * s);
    };
    const geom::FourierProfile p = project_profile(rho, max_order);
    return geom::make_curve2d(p.cos_coef, p.sin_coef);
}

/// Area-preserving ellipse family: a = 1 + eps, b = 1/(1 + eps).
[[nodiscard]] inline geom::StarDomain make_ellipse_family(double eps)
{
    return make_ellipse(1.0 + eps, 1.0 / (1.0 + eps));
}

/// rho(theta) = 1 + eps cos(mode theta).
[[nodiscard]] inline geom::StarDomain make_perturbed_disk(double eps, int mode)
{
    Eigen::VectorXd cc = Eigen::VectorXd::Zero(mode + 1);
    cc[0] = 1.0;
    cc[mode] = eps;
    return geom::make_curve2d(cc);
}

/// Spheroid of revolution with equatorial radius a and polar radius c
/// (semi-axes (a, a, c)), profile rho(phi) = ac / sqrt(c^2 sin^2 + a^2 cos^2).
[[nodiscard]] inline geom::StarDomain make_spheroid(double a, double c, int max_order = 96)
{
    auto rho = [=](double t) {
        // even 2pi-periodic extension of the [0,pi] profile
        const double s = std::sin(t), co = std::cos(t);
        return a * c / std::sqrt(c * c * s * s + a * a * co * co);
    };
    geom::FourierProfile p = project_profile(rho, max_order);
    // the extension is even in t, so sine coefficients vanish identically
    p.sin_coef = Eigen::VectorXd();
    return geom::make_revolution(p.cos_coef);
}

/// Star-shaped dumbbell: the radial hull of two disks of radius `lobe_r`
/// centered at (+-half_dist, 0) joined through a channel |y| <= neck, seen
/// from the origin, with the profile jumps smoothed by a spectral Gaussian
/// mollifier. A true parallel-neck dumbbell is not star shaped; this hull
/// keeps the lobes and the neck half-width while adding the tangent-cone
/// fill that radial star domains require.
[[nodiscard]] inline geom::StarDomain make_dumbbell(double neck, double half_dist = 1.2,
                                                    double lobe_r = 1.0, double sigma = 0.03,
                                                    int max_order = 240)
{
    auto far_hit = [&](double t, double cx) -> double {
        // far intersection of the ray (cos t, sin t) with the disk at (cx, 0)
        const double b = cx * std::cos(t);
        const double disc = lobe_r * lobe_r - cx * cx + b * b;
        if (disc < 0.0) return 0.0;
        const double r = b + std::sqrt(disc);
        return r > 0.0 ? r : 0.0;
    };
    auto rho_raw = [&](double t) {
        // the channel |y| <= neck reaches into the lobes but never past them
        const double channel =
            std::min(neck / std::max(std::abs(std::sin(t)), 1e-9), half_dist);
        return std::max({far_hit(t, half_dist), far_hit(t, -half_dist), channel});
    };
    const geom::FourierProfile p = project_profile(rho_raw, max_order, sigma, 16384);
    return geom::make_curve2d(p.cos_coef, p.sin_coef);
}

}  // namespace khess::shapes
