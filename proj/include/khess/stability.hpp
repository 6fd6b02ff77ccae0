#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "khess/geometry.hpp"
#include "khess/identities.hpp"
#include "khess/pfunction.hpp"
#include "khess/shapes.hpp"
#include "khess/solution.hpp"
#include "khess/solver.hpp"

namespace khess::stability {

/// Worker count for sweep parallelism, capped by HESSIAN_SBT_THREADS.
[[nodiscard]] inline int worker_count(int jobs)
{
    int t = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* e = std::getenv("HESSIAN_SBT_THREADS")) {
        const int v = std::atoi(e);
        if (v > 0) t = v;
    }
    return std::max(1, std::min(t, jobs));
}

/// Run fn(i) for i in [0, jobs) on a bounded pool; results land in index
/// order, so the aggregation is deterministic regardless of scheduling.
template <typename T, typename Fn>
[[nodiscard]] std::vector<T> parallel_map(int jobs, Fn&& fn)
{
    std::vector<T> out(jobs);
    const int workers = worker_count(jobs);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                out[static_cast<size_t>(i)] = fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

struct ShapeSpec {
    std::string id;
    double eps = 0.0;
    geom::StarDomain domain;
};

struct SweepRecord {
    std::string shape_id;
    double eps = 0.0;
    int k = 1;
    double delta_serrin = 0.0;  // || |grad u| - R ||_inf on the boundary
    double delta_sbt = 0.0;     // int (1/Rhat^k - H_k)^+ dsigma
    double rho_gap = 0.0;       // rho_e - rho_i
    double l2_aniso = 0.0;      // || |x-z| - Rhat ||_L2(boundary)
    double R = 0.0, Rhat = 0.0, M = 0.0;
    double r_i = 0.0, d = 0.0;
    double fit_C = 0.0, fit_slope = 0.0;
    double max_lp = 0.0;  // rigidity detector value
    bool ok = true;
    std::string error;
};

namespace detail {

[[nodiscard]] inline double sbt_deficit(const geom::BoundaryTrace& tr, int k, double Rhat)
{
    const Eigen::VectorXd hk = geom::mean_curvature_k(tr, k);
    double acc = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        acc += std::max(0.0, 1.0 / std::pow(Rhat, k) - hk[static_cast<int>(i)]) *
               tr.samples[i].weight;
    }
    return acc;
}

[[nodiscard]] inline double l2_anisotropy(const geom::BoundaryTrace& tr,
                                          const Eigen::VectorXd& z, double Rhat)
{
    double acc = 0.0;
    for (const auto& s : tr.samples) {
        const double d = (s.x - z).norm() - Rhat;
        acc += d * d * s.weight;
    }
    return std::sqrt(acc);
}

/// Least-squares slope of log(y) vs log(x), skipping degenerate pairs.
[[nodiscard]] inline double loglog_slope(const std::vector<double>& x,
                                         const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 1e-12 || y[i] <= 1e-12) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace detail

struct SerrinSweepResult {
    std::vector<SweepRecord> records;
    std::vector<identities::DishReport> dish;
    double fit_slope = 0.0;
    double fit_C = 0.0;          // single constant for rho_gap <= C delta^{1/2}
    double loo_slope_dev = 0.0;  // worst leave-one-out slope deviation
};

/// Sweep the torsion solver over a family of 2D shapes, recording the
/// uniform deficit, the radial gap about the minimum point, and the
/// inequality chain; then fit the log-log stability exponent.
[[nodiscard]] inline SerrinSweepResult serrin_sweep(const std::vector<ShapeSpec>& family, int k,
                                                    double h, double chain_tol_scale = 50.0)
{
    SerrinSweepResult out;
    struct MemberResult {
        SweepRecord rec;
        identities::DishReport dish;
    };
    auto results = parallel_map<MemberResult>(static_cast<int>(family.size()), [&](int i) {
        const ShapeSpec& sh = family[static_cast<size_t>(i)];
        MemberResult mr;
        mr.rec.shape_id = sh.id;
        mr.rec.eps = sh.eps;
        mr.rec.k = k;
        try {
            const auto sol = solver::solve_hessian_2d(sh.domain, k, h);
            const auto bg = solver::boundary_gradient(sol);
            const auto mp = sol.min_point();
            const auto dc = geom::domain_constants(sh.domain, mp.z, 1024);
            const auto& tr = sol.trace();
            mr.rec.R = bg.R;
            mr.rec.Rhat = bg.Rhat;
            mr.rec.M = bg.M;
            double ds = 0.0;
            for (double g : bg.grad_mag) ds = std::max(ds, std::abs(g - bg.R));
            mr.rec.delta_serrin = ds;
            mr.rec.delta_sbt = (k <= sol.dim() - 1) ? detail::sbt_deficit(tr, k, bg.Rhat) : 0.0;
            mr.rec.rho_gap = dc.rho_e - dc.rho_i;
            mr.rec.l2_aniso = detail::l2_anisotropy(tr, mp.z, bg.Rhat);
            mr.rec.r_i = dc.r_i;
            mr.rec.d = dc.diameter;
            const auto pf = pfun::lp_field(sol);
            mr.rec.max_lp = pf.max_LP;
            mr.dish = identities::dish_inequality(sol, dc, chain_tol_scale * h * h);
        } catch (const std::exception& e) {
            mr.rec.ok = false;
            mr.rec.error = e.what();
        }
        return mr;
    });
    std::vector<double> xs, ys;
    for (auto& mr : results) {
        out.records.push_back(mr.rec);
        out.dish.push_back(mr.dish);
        if (mr.rec.ok && mr.rec.delta_serrin > 1e-12 && mr.rec.rho_gap > 1e-12) {
            xs.push_back(mr.rec.delta_serrin);
            ys.push_back(mr.rec.rho_gap);
            out.fit_C = std::max(out.fit_C, mr.rec.rho_gap / std::sqrt(mr.rec.delta_serrin));
        }
    }
    out.fit_slope = detail::loglog_slope(xs, ys);
    for (size_t skip = 0; skip < xs.size(); ++skip) {
        std::vector<double> xr, yr;
        for (size_t i = 0; i < xs.size(); ++i) {
            if (i == skip) continue;
            xr.push_back(xs[i]);
            yr.push_back(ys[i]);
        }
        out.loo_slope_dev =
            std::max(out.loo_slope_dev, std::abs(detail::loglog_slope(xr, yr) - out.fit_slope));
    }
    for (auto& r : out.records) {
        r.fit_C = out.fit_C;
        r.fit_slope = out.fit_slope;
    }
    return out;
}

enum class ZRule { inscribed_center, centroid };

[[nodiscard]] inline Eigen::VectorXd centroid(const geom::StarDomain& dom, int m = 1024)
{
    if (dom.kind == geom::DomainKind::ball) return dom.center;
    if (dom.kind == geom::DomainKind::curve2d) {
        double vol = 0.0;
        Eigen::Vector2d acc(0, 0);
        for (int i = 0; i < m; ++i) {
            const double t = 2.0 * geom::kPi * i / m;
            const double r = dom.profile.eval(t);
            acc += (r * r * r / 3.0) * Eigen::Vector2d(std::cos(t), std::sin(t));
            vol += 0.5 * r * r;
        }
        acc *= 2.0 * geom::kPi / m;
        vol *= 2.0 * geom::kPi / m;
        Eigen::VectorXd c(2);
        c << dom.center[0] + acc[0] / vol, dom.center[1] + acc[1] / vol;
        return c;
    }
    // revolution: centroid on the axis
    std::vector<double> gx, gw;
    geom::detail::gauss_legendre(m, gx, gw);
    double vol = 0.0, zacc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double phi = 0.5 * geom::kPi * (gx[i] + 1.0);
        const double w = 0.5 * geom::kPi * gw[i];
        const double r = dom.profile.eval(phi);
        vol += w * (2.0 * geom::kPi / 3.0) * r * r * r * std::sin(phi);
        zacc += w * (2.0 * geom::kPi / 4.0) * r * r * r * r * std::sin(phi) * std::cos(phi);
    }
    Eigen::VectorXd c = dom.center;
    c[2] += zacc / vol;
    return c;
}

struct SbtSweepResult {
    std::vector<SweepRecord> records;
    double chain_violation = 0.0;  // worst samplewise violation of the Newton chain
    double fit_C = 0.0;            // aniso <= C delta_sbt^{1/2}
    double fit_C_min = 1e300;      // per-member constants for the spread check
    double fit_C_max = 0.0;
    // gradient bound checks, when solutions are available
    double m_bound_slack = 1e300;  // min over members of 2n max(-u) - M^2
    double m_diam_slack = 1e300;   // min over members of n d^2 - 2n max(-u)
};

/// Geometric stability sweep: deficits, anisotropy and the samplewise chain
///   (1/Rhat - H)^+ <= (1/Rhat - H_k^{1/k})^+ <= Rhat^{k-1} (1/Rhat^k - H_k)^+
/// at every trace point. Members with H_k < 0 are rejected. For 2D members
/// with k = 1 the torsion solve also verifies M^2 <= 2n max(-u) <= n d^2.
[[nodiscard]] inline SbtSweepResult sbt_sweep(const std::vector<ShapeSpec>& family, int k,
                                              ZRule z_rule = ZRule::inscribed_center,
                                              std::optional<double> solve_h = std::nullopt)
{
    SbtSweepResult out;
    for (const ShapeSpec& sh : family) {
        SweepRecord rec;
        rec.shape_id = sh.id;
        rec.eps = sh.eps;
        rec.k = k;
        const int n = sh.domain.n;
        if (k > n - 1) {
            rec.ok = false;
            rec.error = "k exceeds n-1";
            out.records.push_back(rec);
            continue;
        }
        const auto tr = geom::boundary_trace(sh.domain, 1024);
        const Eigen::VectorXd hk = geom::mean_curvature_k(tr, k);
        const Eigen::VectorXd h1 = geom::mean_curvature_k(tr, 1);
        int bad = -1;
        for (int i = 0; i < hk.size(); ++i) {
            if (hk[i] < -1e-9) {
                bad = i;
                break;
            }
        }
        if (bad >= 0) {
            rec.ok = false;
            rec.error = "H_k < 0 at sample " + std::to_string(bad);
            out.records.push_back(rec);
            continue;
        }
        const double Rhat = n * tr.volume / tr.perimeter;
        rec.Rhat = Rhat;
        rec.delta_sbt = detail::sbt_deficit(tr, k, Rhat);
        const Eigen::VectorXd z = (z_rule == ZRule::inscribed_center)
                                      ? geom::inscribed_ball(sh.domain).center
                                      : centroid(sh.domain);
        const auto dc = geom::domain_constants(sh.domain, z, 1024);
        rec.rho_gap = dc.rho_e - dc.rho_i;
        rec.l2_aniso = detail::l2_anisotropy(tr, z, Rhat);
        rec.r_i = dc.r_i;
        rec.d = dc.diameter;
        for (int i = 0; i < hk.size(); ++i) {
            const double a = std::max(0.0, 1.0 / Rhat - h1[i]);
            const double b = std::max(0.0, 1.0 / Rhat - std::pow(hk[i], 1.0 / k));
            const double c = std::pow(Rhat, k - 1) *
                             std::max(0.0, 1.0 / std::pow(Rhat, k) - hk[i]);
            out.chain_violation = std::max(out.chain_violation, a - b);
            out.chain_violation = std::max(out.chain_violation, b - c);
        }
        if (rec.delta_sbt > 1e-12 && rec.l2_aniso > 1e-12) {
            const double c = rec.l2_aniso / std::sqrt(rec.delta_sbt);
            out.fit_C = std::max(out.fit_C, c);
            out.fit_C_min = std::min(out.fit_C_min, c);
            out.fit_C_max = std::max(out.fit_C_max, c);
        }
        if (solve_h && sh.domain.kind == geom::DomainKind::curve2d && k == 1) {
            try {
                const auto sol = solver::solve_hessian_2d(sh.domain, 1, *solve_h);
                const auto bg = solver::boundary_gradient(sol);
                rec.R = bg.R;
                rec.M = bg.M;
                double max_neg_u = 0.0;
                for (const auto& nd : sol.nodes()) max_neg_u = std::max(max_neg_u, -nd.u);
                out.m_bound_slack =
                    std::min(out.m_bound_slack, 2.0 * n * max_neg_u - bg.M * bg.M);
                out.m_diam_slack = std::min(
                    out.m_diam_slack, n * dc.diameter * dc.diameter - 2.0 * n * max_neg_u);
                double ds = 0.0;
                for (double g : bg.grad_mag) ds = std::max(ds, std::abs(g - bg.R));
                rec.delta_serrin = ds;
            } catch (const std::exception& e) {
                // geometric record stays; only the gradient-bound check is lost
                rec.error = std::string("solve skipped: ") + e.what();
            }
        }
        out.records.push_back(rec);
    }
    return out;
}

struct BubblingReport {
    int m = 0;
    std::vector<Eigen::Vector2d> centers;  // scaled coordinates
    double Rhat = 0.0;                     // after rescaling, >= 1
    double alpha = 0.0;                    // 2/(2n+7)
    double scale = 1.0;                    // dilation applied to enforce Rhat >= 1
    double symdiff = 0.0;                  // |Omega Delta U|
    double symdiff_sampling_error = 0.0;
    double boundary_gap = 0.0;             // max over dU of dist to dOmega
    double perimeter_gap = 0.0;            // | |dOmega| - |dU| |
    double m_bound = 0.0;                  // |Omega| / (omega_n (Rhat - gap)^n)
    double delta_sbt = 0.0;
    double min_hk = 0.0;
    double volume = 0.0;
    double min_center_separation = 0.0;    // 0 when m = 1
};

namespace detail {

/// Dense periodic table of a profile with Catmull-Rom evaluation; the
/// in/out and distance scans of the bubbling measurements hammer rho(theta)
/// hard enough that direct Fourier sums dominate the runtime otherwise.
class ProfileTable {
public:
    ProfileTable(const geom::FourierProfile& p, int n = 65536) : n_(n), vals_(n)
    {
        for (int i = 0; i < n; ++i) vals_[i] = p.eval(2.0 * geom::kPi * i / n);
    }
    [[nodiscard]] double operator()(double t) const
    {
        double s = t / (2.0 * geom::kPi) * n_;
        s -= std::floor(s / n_) * n_;
        int i1 = static_cast<int>(std::floor(s));
        const double f = s - i1;
        i1 %= n_;
        const int i0 = (i1 + n_ - 1) % n_, i2 = (i1 + 1) % n_, i3 = (i1 + 2) % n_;
        const double a = vals_[i0], b = vals_[i1], c = vals_[i2], d = vals_[i3];
        return b + 0.5 * f * (c - a + f * (2 * a - 5 * b + 4 * c - d + f * (3 * (b - c) + d - a)));
    }

private:
    int n_;
    std::vector<double> vals_;
};

}  // namespace detail

/// Bubbling measurement: detect ball centers from the interior distance
/// transform, build the union of Rhat-balls, and measure its distance to
/// the domain. 2D star curves and exact balls are supported.
[[nodiscard]] inline BubblingReport bubbling(const geom::StarDomain& dom_in, int k,
                                             int sym_cells = 2048)
{
    if (dom_in.kind == geom::DomainKind::revolution3d) {
        throw std::invalid_argument("bubbling: 2D star curves and balls only");
    }
    const int n = dom_in.n;
    if (k < 1 || k > n - 1) {
        throw std::domain_error("bubbling: need 1 <= k <= n-1");
    }
    BubblingReport rep;
    rep.alpha = 2.0 / (2.0 * n + 7.0);

    // rescale so that Rhat >= 1
    {
        const auto tr0 = geom::boundary_trace(dom_in, 1024);
        const double rhat0 = n * tr0.volume / tr0.perimeter;
        rep.scale = rhat0 < 1.0 ? 1.0 / rhat0 : 1.0;
    }
    geom::StarDomain dom = dom_in;
    dom.profile.cos_coef *= rep.scale;
    if (dom.profile.sin_coef.size()) dom.profile.sin_coef *= rep.scale;
    dom.center *= rep.scale;

    const auto tr = geom::boundary_trace(dom, 2048);
    const double Rhat = n * tr.volume / tr.perimeter;
    rep.Rhat = Rhat;
    rep.volume = tr.volume;
    const Eigen::VectorXd hk = geom::mean_curvature_k(tr, k);
    rep.min_hk = hk.minCoeff();
    rep.delta_sbt = detail::sbt_deficit(tr, k, Rhat);

    if (dom.kind == geom::DomainKind::ball) {
        rep.m = 1;
        rep.centers.push_back(dom.center.head<2>());
        const double R = dom.radius();
        rep.boundary_gap = std::abs(R - Rhat);
        rep.perimeter_gap = std::abs(tr.perimeter - n * geom::omega_n(n) * std::pow(Rhat, n - 1));
        const double cell = 2.0 * (R + 0.1) / sym_cells;
        rep.symdiff = geom::kPi * std::abs(R * R - Rhat * Rhat);
        rep.symdiff_sampling_error = cell * cell * (2.0 * geom::kPi * R / cell);
        rep.m_bound = tr.volume / (geom::omega_n(n) * std::pow(Rhat - rep.boundary_gap, n));
        return rep;
    }

    // boundary polyline and fast profile evaluation
    const detail::ProfileTable table(dom.profile);
    const Eigen::Vector2d c2 = dom.center.head<2>();
    const int npoly = 8192;
    std::vector<Eigen::Vector2d> poly(npoly);
    for (int i = 0; i < npoly; ++i) {
        const double t = 2.0 * geom::kPi * i / npoly;
        poly[static_cast<size_t>(i)] =
            c2 + table(t) * Eigen::Vector2d(std::cos(t), std::sin(t));
    }
    auto inside = [&](const Eigen::Vector2d& p) {
        const Eigen::Vector2d d = p - c2;
        const double r = d.norm();
        if (r == 0.0) return true;
        return r < table(std::atan2(d[1], d[0]));
    };
    auto dist_poly = [&](const Eigen::Vector2d& p) {
        double best = 1e300;
        for (const auto& q : poly) best = std::min(best, (q - p).squaredNorm());
        return std::sqrt(best);
    };

    // distance-transform maxima
    double rho_max = 0.0;
    for (int i = 0; i < npoly; ++i) {
        rho_max = std::max(rho_max, (poly[static_cast<size_t>(i)] - c2).norm());
    }
    const int gn = 256;
    const double gh = 2.0 * (rho_max + 0.05) / gn;
    const Eigen::Vector2d glo = c2 - Eigen::Vector2d(rho_max + 0.05, rho_max + 0.05);
    std::vector<double> dist(static_cast<size_t>(gn) * gn, -1.0);
    for (int j = 0; j < gn; ++j) {
        for (int i = 0; i < gn; ++i) {
            const Eigen::Vector2d p = glo + gh * Eigen::Vector2d(i, j);
            if (inside(p)) dist[static_cast<size_t>(j) * gn + i] = dist_poly(p);
        }
    }
    struct Candidate {
        Eigen::Vector2d x;
        double d;
    };
    std::vector<Candidate> cands;
    for (int j = 1; j < gn - 1; ++j) {
        for (int i = 1; i < gn - 1; ++i) {
            const double v = dist[static_cast<size_t>(j) * gn + i];
            if (v <= 0.0) continue;
            bool is_max = true;
            for (int dj = -1; dj <= 1 && is_max; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    if (dist[static_cast<size_t>(j + dj) * gn + (i + di)] > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (!is_max) continue;
            // pattern-search polish
            Eigen::Vector2d x = glo + gh * Eigen::Vector2d(i, j);
            double best = v, step = 0.5 * gh;
            while (step > 1e-10) {
                bool improved = false;
                for (const auto& d2 : {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0),
                                       Eigen::Vector2d(0, 1), Eigen::Vector2d(0, -1)}) {
                    const Eigen::Vector2d y = x + step * d2;
                    if (!inside(y)) continue;
                    const double dv = dist_poly(y);
                    if (dv > best) {
                        best = dv;
                        x = y;
                        improved = true;
                    }
                }
                if (!improved) step *= 0.5;
            }
            if (best >= 0.9 * Rhat) cands.push_back({x, best});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.d != b.d) return a.d > b.d;
        if (a.x[0] != b.x[0]) return a.x[0] < b.x[0];
        return a.x[1] < b.x[1];
    });
    std::vector<Eigen::Vector2d> centers;
    for (const auto& c : cands) {
        bool keep = true;
        for (const auto& z : centers) {
            if ((c.x - z).norm() < 2.0 * Rhat - 1e-9) {
                keep = false;
                break;
            }
        }
        if (keep) centers.push_back(c.x);
    }
    if (centers.empty()) {
        throw std::runtime_error("bubbling: no interior ball of radius 0.9 Rhat found (degenerate shape)");
    }
    rep.m = static_cast<int>(centers.size());
    rep.centers = centers;
    rep.min_center_separation = 0.0;
    for (size_t a = 0; a < centers.size(); ++a) {
        for (size_t b = a + 1; b < centers.size(); ++b) {
            const double s = (centers[a] - centers[b]).norm();
            rep.min_center_separation =
                rep.min_center_separation == 0.0 ? s : std::min(rep.min_center_separation, s);
        }
    }

    auto in_union = [&](const Eigen::Vector2d& p) {
        for (const auto& z : centers) {
            if ((p - z).squaredNorm() < Rhat * Rhat) return true;
        }
        return false;
    };

    // symmetric difference on a stratified grid with corner-based error bars
    Eigen::Vector2d blo = c2, bhi = c2;
    for (const auto& q : poly) {
        blo = blo.cwiseMin(q);
        bhi = bhi.cwiseMax(q);
    }
    for (const auto& z : centers) {
        blo = blo.cwiseMin(z - Eigen::Vector2d(Rhat, Rhat));
        bhi = bhi.cwiseMax(z + Eigen::Vector2d(Rhat, Rhat));
    }
    blo -= Eigen::Vector2d(0.02, 0.02);
    bhi += Eigen::Vector2d(0.02, 0.02);
    const double cw = (bhi[0] - blo[0]) / sym_cells, ch = (bhi[1] - blo[1]) / sym_cells;
    long hits = 0, boundary_cells = 0;
    for (int j = 0; j < sym_cells; ++j) {
        bool prev_in_omega = false, prev_in_u = false;
        for (int i = 0; i < sym_cells; ++i) {
            const Eigen::Vector2d p(blo[0] + (i + 0.5) * cw, blo[1] + (j + 0.5) * ch);
            const bool io = inside(p), iu = in_union(p);
            if (io != iu) ++hits;
            if (i > 0 && (io != prev_in_omega || iu != prev_in_u)) ++boundary_cells;
            prev_in_omega = io;
            prev_in_u = iu;
        }
    }
    rep.symdiff = static_cast<double>(hits) * cw * ch;
    rep.symdiff_sampling_error = static_cast<double>(boundary_cells) * cw * ch;

    // boundary gap: sample the union boundary
    double gap = 0.0;
    for (const auto& z : centers) {
        for (int i = 0; i < 2048; ++i) {
            const double t = 2.0 * geom::kPi * i / 2048;
            const Eigen::Vector2d p = z + Rhat * Eigen::Vector2d(std::cos(t), std::sin(t));
            bool covered = false;
            for (const auto& z2 : centers) {
                if (&z2 != &z && (p - z2).squaredNorm() < Rhat * Rhat) {
                    covered = true;
                    break;
                }
            }
            if (!covered) gap = std::max(gap, dist_poly(p));
        }
    }
    rep.boundary_gap = gap;
    rep.perimeter_gap =
        std::abs(tr.perimeter - rep.m * n * geom::omega_n(n) * std::pow(Rhat, n - 1));
    rep.m_bound = tr.volume / (geom::omega_n(n) * std::pow(Rhat - gap, n));
    return rep;
}

struct ProbeReport {
    bool applicable = true;   // false on balls, where grad h vanishes
    std::vector<double> r_list;
    std::vector<double> sp_ratio;       // ||grad h||_r / ||dist^alpha D2h||_2
    std::vector<double> sp_bound;       // structural constant bound, prefactor 1
    double interp_ratio_p_gt_n = 0.0;   // (max h - min h) / ||grad h||_{p}
    double interp_ratio_p_eq_n = 0.0;
    double interp_ratio_p_lt_n = 0.0;
    double interp_bound_p_gt_n = 0.0;   // structural bound at r = p
    double dist_z = 0.0;
    double b0 = 0.0;  // d / r_i
};

/// Empirical Sobolev-Poincare and interpolation probes on h = q - u. The
/// structural bound is (b0 / dist(z)^{1/r})^n |Omega|^{(1-alpha)/n - 1/p + 2/r}
/// with p = 2 and the unknown universal prefactor set to one.
[[nodiscard]] inline ProbeReport appendix_probes(const solver::GridSolution& sol,
                                                 const Eigen::VectorXd& z,
                                                 std::vector<double> r_list, double alpha = 0.5)
{
    const int n = sol.dim();
    const auto& nodes = sol.nodes();
    const auto& dist = sol.node_boundary_dist();
    const Eigen::Vector2d z2(z[0], z[1]);

    const auto dc = geom::domain_constants(sol.domain(), z, 1024);
    ProbeReport rep;
    rep.r_list = r_list;
    rep.dist_z = geom::dist_to_boundary(sol.domain(), z);
    rep.b0 = dc.diameter / dc.r_i;
    if (rep.dist_z <= 0.0) {
        throw std::domain_error("appendix_probes: z on or outside the boundary");
    }

    auto norm_grad_h = [&](double r) {
        double acc = 0.0;
        for (size_t i = 0; i < nodes.size(); ++i) {
            const Eigen::Vector2d gh = (nodes[i].x - z2) - nodes[i].grad;
            acc += std::pow(gh.norm(), r) * nodes[i].weight;
        }
        return std::pow(acc, 1.0 / r);
    };
    double w2 = 0.0;
    double grad_scale = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const Eigen::Matrix2d d2h = Eigen::Matrix2d::Identity() - nodes[i].hess;
        const Eigen::Vector2d gh = (nodes[i].x - z2) - nodes[i].grad;
        grad_scale = std::max(grad_scale, gh.norm());
        w2 += std::pow(dist[i], 2.0 * alpha) * d2h.squaredNorm() * nodes[i].weight;
    }
    w2 = std::sqrt(w2);
    if (grad_scale < 1e-10 || w2 < 1e-12) {
        rep.applicable = false;
        return rep;
    }
    const double vol = sol.trace().volume;
    for (double r : r_list) {
        rep.sp_ratio.push_back(norm_grad_h(r) / w2);
        rep.sp_bound.push_back(std::pow(rep.b0 / std::pow(rep.dist_z, 1.0 / r), n) *
                               std::pow(vol, (1.0 - alpha) / n - 0.5 + 2.0 / r));
    }

    // range of h over nodes and boundary (h = q on the boundary)
    double hmin = 1e300, hmax = -1e300;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const double hv = 0.5 * (nodes[i].x - z2).squaredNorm() - nodes[i].u;
        hmin = std::min(hmin, hv);
        hmax = std::max(hmax, hv);
    }
    for (const auto& s : sol.trace().samples) {
        const double hv = 0.5 * (s.x.head<2>() - z2).squaredNorm();
        hmin = std::min(hmin, hv);
        hmax = std::max(hmax, hv);
    }
    const double dh = hmax - hmin;
    const double p_gt = 2.0 * n;  // > n
    const double q_hi = 2.0 * p_gt;
    rep.interp_ratio_p_gt_n = dh / norm_grad_h(p_gt);
    const double nn = norm_grad_h(n), nq = norm_grad_h(q_hi);
    rep.interp_ratio_p_eq_n =
        dh / (nn * std::log(std::exp(1.0) * std::pow(vol, 1.0 / n - 1.0 / q_hi) * nq / nn));
    const double p_lt = 0.75 * n;  // < n
    const double a_pq = p_lt * (q_hi - n) / (n * (q_hi - p_lt));
    rep.interp_ratio_p_lt_n =
        dh / (std::pow(nq, 1.0 - a_pq) * std::pow(norm_grad_h(p_lt), a_pq));
    rep.interp_bound_p_gt_n = std::pow(rep.b0 / std::pow(rep.dist_z, 1.0 / p_gt), n) *
                              std::pow(vol, (1.0 - alpha) / n - 0.5 + 2.0 / p_gt);
    return rep;
}

}  // namespace khess::stability
