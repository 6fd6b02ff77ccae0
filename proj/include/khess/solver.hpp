#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "khess/geometry.hpp"
#include "khess/solution.hpp"
#include "khess/symfun.hpp"

namespace khess::solver {

struct ConvergenceError : std::runtime_error {
    double last_residual;
    explicit ConvergenceError(double r)
        : std::runtime_error("Newton iteration stagnated, residual " + std::to_string(r)),
          last_residual(r)
    {
    }
};

struct ConeError : std::runtime_error {
    ConeError() : std::runtime_error("iterate left the Gamma_k cone and damping cannot recover")
    {
    }
};

using ScalarFn2 = std::function<double(const Eigen::Vector2d&)>;

/// Cartesian grid over a 2D star domain with Shortley-Weller cut arms.
/// Interior nodes closer than 0.01 h to the boundary along a grid axis are
/// eliminated: their value is the 1D quadratic interpolant through the cut
/// point and the two interior nodes across the pinch, which keeps the
/// scheme exact on quadratics and the arms uniformly bounded below.
class Grid2D {
public:
    struct Arm {
        double len = 0.0;   // distance to the referenced node or cut point
        int nbr = -1;       // flat id of an interior node, or -1 for a cut
        double known = 0.0; // Dirichlet value at the cut point when nbr < 0
    };
    struct Arms {
        Arm e, w, n, s;
    };
    /// Value of an eliminated node: c0 + sum_i c[i] * u[unknown idx[i]].
    struct Elim {
        int cnt = 0;
        int idx[2] = {-1, -1};
        double c[2] = {0.0, 0.0};
        double c0 = 0.0;
    };

    Grid2D(geom::StarDomain dom, double h, ScalarFn2 dirichlet)
        : dom_(std::move(dom)), h_(h), g_(std::move(dirichlet))
    {
        dom_.validate();
        if (dom_.kind != geom::DomainKind::curve2d && dom_.kind != geom::DomainKind::ball) {
            throw std::invalid_argument("Grid2D: 2D domains only");
        }
        double rho_min = 1e300, rho_max = 0.0;
        for (int i = 0; i < 2048; ++i) {
            const double r = dom_.profile.eval(2.0 * geom::kPi * i / 2048.0);
            rho_min = std::min(rho_min, r);
            rho_max = std::max(rho_max, r);
        }
        if ((rho_max - rho_min) / (rho_max + rho_min) > 0.35) {
            throw std::domain_error("Grid2D: profile outside the near-circular envelope");
        }
        if (h > rho_min / 24.0) {
            throw std::domain_error(
                "Grid2D: h too coarse for the profile (need >= 24 nodes across min radius)");
        }
        const double half = rho_max + 2.5 * h;
        lo_ = dom_.center.head<2>() - Eigen::Vector2d(half, half);
        nx_ = static_cast<int>(std::ceil(2.0 * half / h)) + 1;
        ny_ = nx_;
        build();
    }

    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] const Eigen::Vector2d& lo() const { return lo_; }
    [[nodiscard]] const geom::StarDomain& domain() const { return dom_; }
    [[nodiscard]] Eigen::Vector2d point(int flat) const
    {
        return lo_ + h_ * Eigen::Vector2d(flat % nx_, flat / nx_);
    }
    [[nodiscard]] int flat(int i, int j) const { return j * nx_ + i; }
    [[nodiscard]] bool interior(int flat) const { return state_[flat] != 0; }
    [[nodiscard]] bool eliminated(int flat) const { return state_[flat] == 2; }
    [[nodiscard]] const std::vector<int>& unknowns() const { return unknowns_; }
    [[nodiscard]] int unknown_index(int flat) const { return uidx_[flat]; }
    [[nodiscard]] const Arms& arms(int uidx) const { return arms_[uidx]; }
    [[nodiscard]] int xy_host(int uidx) const { return xy_host_[uidx]; }
    [[nodiscard]] const Elim& elim(int flat) const { return elim_[flat]; }

    /// Field value at an interior flat node given the unknown vector.
    [[nodiscard]] double value(const Eigen::VectorXd& u, int flat) const
    {
        if (state_[flat] == 1) return u[uidx_[flat]];
        if (state_[flat] == 2) {
            const Elim& e = elim_[flat];
            double v = e.c0;
            for (int i = 0; i < e.cnt; ++i) v += e.c[i] * u[e.idx[i]];
            return v;
        }
        return 0.0;
    }

    struct Stencil1D {
        double c_m, c_0, c_p;
    };
    [[nodiscard]] static Stencil1D second_difference(double hm, double hp)
    {
        return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
    }
    [[nodiscard]] static Stencil1D first_difference(double hm, double hp)
    {
        const double d = hm * hp * (hm + hp);
        return {-hp * hp / d, (hp * hp - hm * hm) / d, hm * hm / d};
    }

    struct HessAt {
        double uxx, uyy, uxy;
    };
    [[nodiscard]] HessAt hessian(const Eigen::VectorXd& u, int uidx) const
    {
        const Arms& a = arms_[uidx];
        const double u0 = u[uidx];
        const double ue = a.e.nbr >= 0 ? value(u, a.e.nbr) : a.e.known;
        const double uw = a.w.nbr >= 0 ? value(u, a.w.nbr) : a.w.known;
        const double un = a.n.nbr >= 0 ? value(u, a.n.nbr) : a.n.known;
        const double us = a.s.nbr >= 0 ? value(u, a.s.nbr) : a.s.known;
        const Stencil1D sx = second_difference(a.w.len, a.e.len);
        const Stencil1D sy = second_difference(a.s.len, a.n.len);
        HessAt hh{};
        hh.uxx = sx.c_m * uw + sx.c_0 * u0 + sx.c_p * ue;
        hh.uyy = sy.c_m * us + sy.c_0 * u0 + sy.c_p * un;
        const int q = xy_host_[uidx];
        const int i = q % nx_, j = q / nx_;
        hh.uxy = (value(u, flat(i + 1, j + 1)) + value(u, flat(i - 1, j - 1)) -
                  value(u, flat(i + 1, j - 1)) - value(u, flat(i - 1, j + 1))) /
                 (4.0 * h_ * h_);
        return hh;
    }

    /// Discrete Hessian of an arbitrary field given nodal values at interior
    /// nodes and a boundary evaluator for the cut points.
    [[nodiscard]] HessAt hessian_field(const std::function<double(int)>& nodal,
                                       const std::function<double(const Eigen::Vector2d&)>& bval,
                                       int uidx) const
    {
        const Arms& a = arms_[uidx];
        const int p = unknowns_[uidx];
        const Eigen::Vector2d xp = point(p);
        auto side = [&](const Arm& arm, const Eigen::Vector2d& dir) -> double {
            if (arm.nbr >= 0) return nodal(arm.nbr);
            return bval(xp + arm.len * dir);
        };
        const double u0 = nodal(p);
        const double ue = side(a.e, {1, 0});
        const double uw = side(a.w, {-1, 0});
        const double un = side(a.n, {0, 1});
        const double us = side(a.s, {0, -1});
        const Stencil1D sx = second_difference(a.w.len, a.e.len);
        const Stencil1D sy = second_difference(a.s.len, a.n.len);
        HessAt hh{};
        hh.uxx = sx.c_m * uw + sx.c_0 * u0 + sx.c_p * ue;
        hh.uyy = sy.c_m * us + sy.c_0 * u0 + sy.c_p * un;
        const int q = xy_host_[uidx];
        const int qi = q % nx_, qj = q / nx_;
        hh.uxy = (nodal(flat(qi + 1, qj + 1)) + nodal(flat(qi - 1, qj - 1)) -
                  nodal(flat(qi + 1, qj - 1)) - nodal(flat(qi - 1, qj + 1))) /
                 (4.0 * h_ * h_);
        return hh;
    }

    [[nodiscard]] Eigen::Vector2d gradient(const Eigen::VectorXd& u, int uidx) const
    {
        const Arms& a = arms_[uidx];
        const double u0 = u[uidx];
        const double ue = a.e.nbr >= 0 ? value(u, a.e.nbr) : a.e.known;
        const double uw = a.w.nbr >= 0 ? value(u, a.w.nbr) : a.w.known;
        const double un = a.n.nbr >= 0 ? value(u, a.n.nbr) : a.n.known;
        const double us = a.s.nbr >= 0 ? value(u, a.s.nbr) : a.s.known;
        const Stencil1D dx = first_difference(a.w.len, a.e.len);
        const Stencil1D dy = first_difference(a.s.len, a.n.len);
        return {dx.c_m * uw + dx.c_0 * u0 + dx.c_p * ue,
                dy.c_m * us + dy.c_0 * u0 + dy.c_p * un};
    }

    /// Nodes whose cross and diagonal stencils are the regular centered ones.
    [[nodiscard]] bool core(int uidx) const { return core_[uidx]; }

    /// Moving-least-squares quadratic fit around a point; exact on quadratics.
    struct MlsResult {
        double value;
        Eigen::Vector2d grad;
        bool ok;
    };
    [[nodiscard]] MlsResult mls_eval(const Eigen::VectorXd& u, const Eigen::Vector2d& x) const
    {
        for (double radius : {2.6 * h_, 3.4 * h_, 4.5 * h_}) {
            const int ic = static_cast<int>(std::floor((x[0] - lo_[0]) / h_));
            const int jc = static_cast<int>(std::floor((x[1] - lo_[1]) / h_));
            const int span = static_cast<int>(std::ceil(radius / h_)) + 1;
            std::vector<int> pts;
            for (int j = jc - span; j <= jc + span; ++j) {
                for (int i = ic - span; i <= ic + span; ++i) {
                    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
                    const int f = flat(i, j);
                    if (state_[f] != 1) continue;
                    if ((point(f) - x).norm() <= radius) pts.push_back(f);
                }
            }
            if (pts.size() < 8) continue;
            Eigen::MatrixXd A(pts.size(), 6);
            Eigen::VectorXd b(pts.size());
            for (size_t r = 0; r < pts.size(); ++r) {
                const Eigen::Vector2d d = (point(pts[r]) - x) / h_;
                const double wr = std::pow(1.0 - std::min(1.0, d.norm() * h_ / radius), 2);
                A.row(static_cast<int>(r)) << 1.0, d[0], d[1], 0.5 * d[0] * d[0], d[0] * d[1],
                    0.5 * d[1] * d[1];
                A.row(static_cast<int>(r)) *= wr;
                b[static_cast<int>(r)] = wr * value(u, pts[r]);
            }
            Eigen::Matrix<double, 6, 6> N = A.transpose() * A;
            Eigen::Matrix<double, 6, 1> rhs = A.transpose() * b;
            Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(N);
            if (ldlt.info() != Eigen::Success) continue;
            Eigen::Matrix<double, 6, 1> c = ldlt.solve(rhs);
            return {c[0], Eigen::Vector2d(c[1] / h_, c[2] / h_), true};
        }
        return {0.0, Eigen::Vector2d::Zero(), false};
    }

private:
    void build()
    {
        const int total = nx_ * ny_;
        state_.assign(total, 0);
        uidx_.assign(total, -1);
        elim_.assign(total, Elim{});
        for (int f = 0; f < total; ++f) {
            if (geom::is_inside(dom_, point(f))) state_[f] = 1;
        }
        auto cut = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& dir,
                       double hi) -> double {
            double a = 0.0, b = hi;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (a + b);
                if (geom::is_inside(dom_, p + mid * dir)) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        };
        const Eigen::Vector2d dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        const int offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

        // mark pinched nodes (any cut arm below 0.01 h) for elimination
        std::vector<std::array<double, 4>> rawlen(total, {h_, h_, h_, h_});
        for (int j = 1; j < ny_ - 1; ++j) {
            for (int i = 1; i < nx_ - 1; ++i) {
                const int f = flat(i, j);
                if (state_[f] != 1) continue;
                const Eigen::Vector2d p = point(f);
                double mn = h_;
                int mn_dir = -1;
                for (int d = 0; d < 4; ++d) {
                    const int nf = flat(i + offs[d][0], j + offs[d][1]);
                    if (state_[nf] == 0) {
                        rawlen[f][static_cast<size_t>(d)] = cut(p, dirs[d], h_);
                        if (rawlen[f][static_cast<size_t>(d)] < mn) {
                            mn = rawlen[f][static_cast<size_t>(d)];
                            mn_dir = d;
                        }
                    }
                }
                if (mn < 0.01 * h_) {
                    state_[f] = 2;
                    elim_[f].c0 = mn;  // stash pinch distance; direction in idx[0]
                    elim_[f].idx[0] = mn_dir;
                }
            }
        }
        unknowns_.clear();
        for (int f = 0; f < total; ++f) {
            if (state_[f] == 1) {
                uidx_[f] = static_cast<int>(unknowns_.size());
                unknowns_.push_back(f);
            }
        }
        // interpolation records for eliminated nodes: 1D quadratic through the
        // cut point and the two interior nodes across the pinch
        for (int f = 0; f < total; ++f) {
            if (state_[f] != 2) continue;
            const int pin_dir = elim_[f].idx[0];
            const double d = std::max(elim_[f].c0, 1e-6 * h_);
            elim_[f] = Elim{};
            const int i = f % nx_, j = f / nx_;
            const Eigen::Vector2d p = point(f);
            const double gval = g_(p + d * dirs[pin_dir]);
            const int oi = -offs[pin_dir][0], oj = -offs[pin_dir][1];
            auto flat_at = [&](int steps) { return flat(i + steps * oi, j + steps * oj); };
            auto usable = [&](int steps) {
                const int ii = i + steps * oi, jj = j + steps * oj;
                return ii >= 0 && jj >= 0 && ii < nx_ && jj < ny_ && state_[flat(ii, jj)] == 1;
            };
            Elim& e = elim_[f];
            if (usable(1) && usable(2)) {
                // points: cut at +d, D at -h, E at -2h; evaluate at 0
                e.cnt = 2;
                e.idx[0] = uidx_[flat_at(1)];
                e.idx[1] = uidx_[flat_at(2)];
                // Lagrange weights at 0 for nodes {cut: +d, D: -h, E: -2h}
                e.c[0] = 2.0 * d / (h_ + d);
                e.c[1] = -d / (2.0 * h_ + d);
                e.c0 = gval * 2.0 * h_ * h_ / ((d + h_) * (d + 2.0 * h_));
            } else if (usable(1)) {
                e.cnt = 1;
                e.idx[0] = uidx_[flat_at(1)];
                e.c[0] = d / (h_ + d);
                e.c0 = gval * h_ / (h_ + d);
            } else {
                e.cnt = 0;
                e.c0 = gval;  // isolated sliver: the node is on the boundary to O(d)
            }
        }

        arms_.resize(unknowns_.size());
        xy_host_.resize(unknowns_.size());
        core_.resize(unknowns_.size());
        for (size_t q = 0; q < unknowns_.size(); ++q) {
            const int f = unknowns_[q];
            const int i = f % nx_, j = f / nx_;
            const Eigen::Vector2d p = point(f);
            auto mk = [&](int d) -> Arm {
                Arm a;
                const int nf = flat(i + offs[d][0], j + offs[d][1]);
                if (state_[nf] != 0) {
                    a.len = h_;
                    a.nbr = nf;
                } else {
                    a.len = std::max(rawlen[f][static_cast<size_t>(d)], 0.01 * h_);
                    a.nbr = -1;
                    a.known = g_(p + rawlen[f][static_cast<size_t>(d)] * dirs[d]);
                }
                return a;
            };
            Arms& a = arms_[q];
            a.e = mk(0);
            a.w = mk(1);
            a.n = mk(2);
            a.s = mk(3);

            int host = -1;
            for (int rad = 0; rad <= 2 && host < 0; ++rad) {
                for (int dj = -rad; dj <= rad && host < 0; ++dj) {
                    for (int di = -rad; di <= rad && host < 0; ++di) {
                        if (std::max(std::abs(di), std::abs(dj)) != rad) continue;
                        const int ii = i + di, jj = j + dj;
                        if (ii < 1 || jj < 1 || ii >= nx_ - 1 || jj >= ny_ - 1) continue;
                        if (!state_[flat(ii, jj)]) continue;
                        const bool ok = state_[flat(ii + 1, jj + 1)] &&
                                        state_[flat(ii - 1, jj - 1)] &&
                                        state_[flat(ii + 1, jj - 1)] &&
                                        state_[flat(ii - 1, jj + 1)];
                        if (ok) host = flat(ii, jj);
                    }
                }
            }
            if (host < 0) {
                throw std::domain_error("Grid2D: no cross stencil available (domain too thin for h)");
            }
            xy_host_[q] = host;
            const bool diag_clean = host == f && state_[flat(i + 1, j + 1)] == 1 &&
                                    state_[flat(i - 1, j - 1)] == 1 &&
                                    state_[flat(i + 1, j - 1)] == 1 &&
                                    state_[flat(i - 1, j + 1)] == 1;
            core_[q] = a.e.nbr >= 0 && state_[a.e.nbr] == 1 && a.w.nbr >= 0 &&
                       state_[a.w.nbr] == 1 && a.n.nbr >= 0 && state_[a.n.nbr] == 1 &&
                       a.s.nbr >= 0 && state_[a.s.nbr] == 1 && diag_clean;
        }
    }

    geom::StarDomain dom_;
    double h_;
    ScalarFn2 g_;
    Eigen::Vector2d lo_;
    int nx_ = 0, ny_ = 0;
    std::vector<int8_t> state_;
    std::vector<int> uidx_;
    std::vector<Elim> elim_;
    std::vector<int> unknowns_;
    std::vector<Arms> arms_;
    std::vector<int> xy_host_;
    std::vector<bool> core_;
};

struct SolveOptions {
    double tol = 1e-9;  // max nodal residual
    int max_iter = 60;
    int max_damping = 30;  // halvings per Newton step
    int trace_m = 512;
};

/// Converged finite-difference solution on a 2D star domain.
class GridSolution final : public Solution {
public:
    GridSolution(std::shared_ptr<Grid2D> grid, int k, Eigen::VectorXd u,
                 geom::BoundaryTrace trace, double max_residual)
        : grid_(std::move(grid)), k_(k), u_(std::move(u)), trace_(std::move(trace)),
          max_residual_(max_residual)
    {
        finalize();
    }

    [[nodiscard]] int dim() const override { return 2; }
    [[nodiscard]] int hessian_order() const override { return k_; }
    [[nodiscard]] const geom::StarDomain& domain() const override { return grid_->domain(); }
    [[nodiscard]] const geom::BoundaryTrace& trace() const override { return trace_; }
    [[nodiscard]] const std::vector<VolumeSample>& volume_samples() const override
    {
        return samples_;
    }
    [[nodiscard]] const std::vector<double>& boundary_grad() const override { return bgrad_; }
    [[nodiscard]] bool is_grid() const override { return true; }

    [[nodiscard]] const Grid2D& grid() const { return *grid_; }
    [[nodiscard]] const Eigen::VectorXd& values() const { return u_; }
    [[nodiscard]] double max_residual() const { return max_residual_; }

    struct Node {
        int flat;
        Eigen::Vector2d x;
        double u;
        Eigen::Vector2d grad;
        Eigen::Matrix2d hess;
        double weight;  // cut-cell volume weight
        bool core;
        // deep core: this node and its 8 neighbors all carry regular
        // centered stencils, so discrete errors vary smoothly here and
        // second differences of derived fields stay O(h^2)
        bool deep_core;
    };
    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }

    [[nodiscard]] const std::vector<double>& node_boundary_dist() const
    {
        if (dist_.empty()) {
            dist_.resize(nodes_.size());
            for (size_t i = 0; i < nodes_.size(); ++i) {
                Eigen::VectorXd p(2);
                p << nodes_[i].x[0], nodes_[i].x[1];
                dist_[i] = geom::dist_to_boundary(grid_->domain(), p);
            }
        }
        return dist_;
    }

    [[nodiscard]] MinPoint min_point() const override
    {
        const auto& nd = nodes_;
        size_t best = 0;
        for (size_t i = 1; i < nd.size(); ++i) {
            if (nd[i].u < nd[best].u) best = i;
        }
        MinPoint mp;
        mp.degenerate = !nd[best].core;
        const auto fit = grid_->mls_eval(u_, nd[best].x);
        Eigen::Vector2d z = nd[best].x;
        double uz = nd[best].u;
        if (fit.ok) {
            const double eps = grid_->h();
            auto gat = [&](const Eigen::Vector2d& dx) { return grid_->mls_eval(u_, nd[best].x + dx); };
            const auto gx = gat({eps, 0}), gmx = gat({-eps, 0});
            const auto gy = gat({0, eps}), gmy = gat({0, -eps});
            if (gx.ok && gmx.ok && gy.ok && gmy.ok) {
                Eigen::Matrix2d H;
                H << (gx.grad[0] - gmx.grad[0]) / (2 * eps), (gy.grad[0] - gmy.grad[0]) / (2 * eps),
                    (gx.grad[1] - gmx.grad[1]) / (2 * eps), (gy.grad[1] - gmy.grad[1]) / (2 * eps);
                const Eigen::Vector2d step = -H.ldlt().solve(fit.grad);
                if (step.norm() <= 1.5 * grid_->h()) {
                    const auto refined = grid_->mls_eval(u_, nd[best].x + step);
                    if (refined.ok && refined.value <= uz) {
                        z = nd[best].x + step;
                        uz = refined.value;
                    }
                }
            }
        }
        mp.z = Eigen::VectorXd(2);
        mp.z << z[0], z[1];
        mp.u_min = uz;
        mp.dist_boundary = geom::dist_to_boundary(grid_->domain(), mp.z);
        return mp;
    }

private:
    void finalize()
    {
        const Grid2D& G = *grid_;
        const auto& unk = G.unknowns();
        nodes_.resize(unk.size());
        for (size_t q = 0; q < unk.size(); ++q) {
            Node& nd = nodes_[q];
            nd.flat = unk[q];
            nd.x = G.point(unk[q]);
            nd.u = u_[static_cast<int>(q)];
            nd.grad = G.gradient(u_, static_cast<int>(q));
            const auto hh = G.hessian(u_, static_cast<int>(q));
            nd.hess << hh.uxx, hh.uxy, hh.uxy, hh.uyy;
            nd.core = G.core(static_cast<int>(q));
            nd.weight = 0.0;
            nd.deep_core = false;
        }
        for (size_t q = 0; q < unk.size(); ++q) {
            if (!nodes_[q].core) continue;
            const int i = unk[q] % G.nx(), j = unk[q] / G.nx();
            bool deep = true;
            for (int dj = -1; dj <= 1 && deep; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    const int ui = G.unknown_index(G.flat(i + di, j + dj));
                    if (ui < 0 || !G.core(ui)) {
                        deep = false;
                        break;
                    }
                }
            }
            nodes_[q].deep_core = deep;
        }
        assign_weights();
        samples_.clear();
        samples_.reserve(nodes_.size());
        for (const Node& nd : nodes_) {
            if (nd.weight <= 0.0) continue;
            VolumeSample s;
            s.x = Eigen::VectorXd(2);
            s.x << nd.x[0], nd.x[1];
            s.w = nd.weight;
            s.u = nd.u;
            s.grad = nd.grad;
            s.hess = nd.hess;
            samples_.push_back(std::move(s));
        }
        extract_boundary_gradient();
    }

    void assign_weights()
    {
        const Grid2D& G = *grid_;
        const double h = G.h();
        const auto& dom = G.domain();
        std::vector<int> pos(G.nx() * G.ny(), -1);
        for (size_t q = 0; q < nodes_.size(); ++q) pos[nodes_[q].flat] = static_cast<int>(q);

        auto nearest_unknown = [&](int i, int j) -> int {
            for (int rad = 1; rad <= 3; ++rad) {
                for (int dj = -rad; dj <= rad; ++dj) {
                    for (int di = -rad; di <= rad; ++di) {
                        if (std::max(std::abs(di), std::abs(dj)) != rad) continue;
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || jj < 0 || ii >= G.nx() || jj >= G.ny()) continue;
                        const int p = pos[G.flat(ii, jj)];
                        if (p >= 0) return p;
                    }
                }
            }
            return -1;
        };

        for (int j = 0; j < G.ny(); ++j) {
            for (int i = 0; i < G.nx(); ++i) {
                const int f = G.flat(i, j);
                const Eigen::Vector2d c = G.point(f);
                int in = 0;
                for (int cy = -1; cy <= 1; cy += 2) {
                    for (int cx = -1; cx <= 1; cx += 2) {
                        Eigen::VectorXd p(2);
                        p << c[0] + 0.5 * h * cx, c[1] + 0.5 * h * cy;
                        if (geom::is_inside(dom, p)) ++in;
                    }
                }
                double frac;
                const bool own = pos[f] >= 0;
                if (in == 4 && own) {
                    frac = 1.0;
                } else if (in == 0 && !G.interior(f)) {
                    continue;
                } else {
                    int cnt = 0;
                    for (int sy = 0; sy < 16; ++sy) {
                        for (int sx = 0; sx < 16; ++sx) {
                            Eigen::VectorXd p(2);
                            p << c[0] + h * ((sx + 0.5) / 16.0 - 0.5),
                                c[1] + h * ((sy + 0.5) / 16.0 - 0.5);
                            if (geom::is_inside(dom, p)) ++cnt;
                        }
                    }
                    frac = cnt / 256.0;
                    if (frac == 0.0) continue;
                }
                const double w = frac * h * h;
                int target = pos[f];
                if (target < 0) target = nearest_unknown(i, j);
                if (target >= 0) nodes_[static_cast<size_t>(target)].weight += w;
            }
        }
    }

    void extract_boundary_gradient()
    {
        const Grid2D& G = *grid_;
        bgrad_.resize(trace_.samples.size());
        const double s = 1.2 * G.h();
        for (size_t i = 0; i < trace_.samples.size(); ++i) {
            const Eigen::Vector2d xb = trace_.samples[i].x.head<2>();
            const Eigen::Vector2d nin = -trace_.samples[i].normal.head<2>();
            double v[3];
            bool ok = true;
            for (int j = 1; j <= 3; ++j) {
                const auto r = G.mls_eval(u_, xb + (j * s) * nin);
                ok = ok && r.ok;
                v[j - 1] = r.value;
            }
            if (!ok) {
                throw std::runtime_error("boundary gradient extraction failed (thin stencil)");
            }
            // one-sided derivative at the boundary: cubic through (0, g(xb)=0)
            // and the three interior samples
            const double dn = (18.0 * v[0] - 9.0 * v[1] + 2.0 * v[2]) / (6.0 * s);
            bgrad_[i] = std::abs(dn);
        }
    }

    std::shared_ptr<Grid2D> grid_;
    int k_;
    Eigen::VectorXd u_;
    geom::BoundaryTrace trace_;
    double max_residual_;
    std::vector<Node> nodes_;
    std::vector<VolumeSample> samples_;
    std::vector<double> bgrad_;
    mutable std::vector<double> dist_;
};

namespace detail {

struct Residual {
    Eigen::VectorXd r;
    double max_abs = 0.0;
    bool in_cone = true;
};

inline Residual residual_2d(const Grid2D& G, int k, const Eigen::VectorXd& u,
                            const std::vector<double>& rhs, bool check_cone)
{
    const int N = static_cast<int>(G.unknowns().size());
    Residual out;
    out.r.resize(N);
    for (int q = 0; q < N; ++q) {
        const auto hh = G.hessian(u, q);
        const double sk = (k == 1) ? (hh.uxx + hh.uyy) : (hh.uxx * hh.uyy - hh.uxy * hh.uxy);
        out.r[q] = sk - rhs[q];
        out.max_abs = std::max(out.max_abs, std::abs(out.r[q]));
        if (check_cone) {
            const double s1 = hh.uxx + hh.uyy;
            const double s2 = hh.uxx * hh.uyy - hh.uxy * hh.uxy;
            if (s1 < -symfun::kConeTol || s2 < -symfun::kConeTol) out.in_cone = false;
        }
    }
    return out;
}

}  // namespace detail

/// Solve S_k(D^2 u) = F in Omega, u = G on the boundary (2D, k in {1,2})
/// by damped Newton on the nodal residual. The Jacobian rows contract the
/// stencils with S_k^{ij}(D^2 u); for k = 2 every accepted iterate stays in
/// Gamma_2 (the Newton directions are then descent directions).
[[nodiscard]] inline GridSolution solve_hessian_2d_general(
    const geom::StarDomain& dom, int k, double h, const ScalarFn2& F, const ScalarFn2& G,
    const std::optional<Eigen::VectorXd>& init = std::nullopt, SolveOptions opt = {})
{
    if (k != 1 && k != 2) throw std::domain_error("solve_hessian_2d: k must be 1 or 2");
    auto grid = std::make_shared<Grid2D>(dom, h, G);
    const int N = static_cast<int>(grid->unknowns().size());
    std::vector<double> rhs(N);
    for (int q = 0; q < N; ++q) rhs[q] = F(grid->point(grid->unknowns()[q]));

    Eigen::VectorXd u = init ? *init : Eigen::VectorXd::Zero(N);
    if (init && init->size() != N) throw std::invalid_argument("solve_hessian_2d: bad init size");

    const bool guard = (k == 2);
    auto res = detail::residual_2d(*grid, k, u, rhs, guard);
    int stagnation = 0;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if (res.max_abs <= opt.tol) break;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(N) * 12);
        auto add = [&](int row, int flatid, double val) {
            if (flatid < 0 || val == 0.0) return;
            const int col = grid->unknown_index(flatid);
            if (col >= 0) {
                trip.emplace_back(row, col, val);
            } else if (grid->eliminated(flatid)) {
                const auto& e = grid->elim(flatid);
                for (int t = 0; t < e.cnt; ++t) trip.emplace_back(row, e.idx[t], val * e.c[t]);
            }
        };
        for (int q = 0; q < N; ++q) {
            const auto& a = grid->arms(q);
            const auto hh = grid->hessian(u, q);
            const auto sx = Grid2D::second_difference(a.w.len, a.e.len);
            const auto sy = Grid2D::second_difference(a.s.len, a.n.len);
            const double cxx = (k == 1) ? 1.0 : hh.uyy;
            const double cyy = (k == 1) ? 1.0 : hh.uxx;
            const double cxy = (k == 1) ? 0.0 : -2.0 * hh.uxy;
            trip.emplace_back(q, q, cxx * sx.c_0 + cyy * sy.c_0);
            add(q, a.e.nbr, cxx * sx.c_p);
            add(q, a.w.nbr, cxx * sx.c_m);
            add(q, a.n.nbr, cyy * sy.c_p);
            add(q, a.s.nbr, cyy * sy.c_m);
            if (cxy != 0.0) {
                const int host = grid->xy_host(q);
                const int i = host % grid->nx(), j = host / grid->nx();
                const double c4 = 1.0 / (4.0 * h * h);
                add(q, grid->flat(i + 1, j + 1), cxy * c4);
                add(q, grid->flat(i - 1, j - 1), cxy * c4);
                add(q, grid->flat(i + 1, j - 1), -cxy * c4);
                add(q, grid->flat(i - 1, j + 1), -cxy * c4);
            }
        }
        Eigen::SparseMatrix<double> J(N, N);
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) {
            throw ConvergenceError(res.max_abs);
        }
        const Eigen::VectorXd step = lu.solve(-res.r);

        double alpha = 1.0;
        bool accepted = false;
        for (int d = 0; d <= opt.max_damping; ++d) {
            Eigen::VectorXd cand = u + alpha * step;
            auto cres = detail::residual_2d(*grid, k, cand, rhs, guard);
            if (cres.in_cone && cres.max_abs <= (1.0 - 1e-4 * alpha) * res.max_abs) {
                u = std::move(cand);
                res = std::move(cres);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            auto full = detail::residual_2d(*grid, k, u + step, rhs, guard);
            if (guard && !full.in_cone) {
                if (++stagnation >= 3) throw ConeError();
            } else if (++stagnation >= 10) {
                throw ConvergenceError(res.max_abs);
            }
        } else {
            stagnation = 0;
        }
    }
    if (res.max_abs > opt.tol) throw ConvergenceError(res.max_abs);

    geom::BoundaryTrace tr = geom::boundary_trace(dom, opt.trace_m);
    return GridSolution(grid, k, std::move(u), std::move(tr), res.max_abs);
}

/// The k-Hessian torsion problem S_k(D^2 u) = binom(n,k), u = 0 on the
/// boundary. k = 1 is a single linear solve; k = 2 starts from the scaled
/// k = 1 solution, projected into the cone if needed.
[[nodiscard]] inline GridSolution solve_hessian_2d(const geom::StarDomain& dom, int k, double h,
                                                   SolveOptions opt = {})
{
    const auto zero = [](const Eigen::Vector2d&) { return 0.0; };
    const auto f1 = [](const Eigen::Vector2d&) { return 2.0; };  // binom(2,1)
    if (k == 1) {
        return solve_hessian_2d_general(dom, 1, h, f1, zero, std::nullopt, opt);
    }
    if (k != 2) throw std::domain_error("solve_hessian_2d: k must be 1 or 2 in 2D");
    GridSolution lin = solve_hessian_2d_general(dom, 1, h, f1, zero, std::nullopt, opt);
    Eigen::VectorXd u0 = std::sqrt(symfun::binom(2, 2) / symfun::binom(2, 1)) * lin.values();
    const Grid2D& G = lin.grid();
    auto in_cone = [&](const Eigen::VectorXd& v) {
        return detail::residual_2d(G, 2, v, std::vector<double>(G.unknowns().size(), 1.0), true)
            .in_cone;
    };
    double eps = 1e-3;
    for (int tries = 0; tries < 24 && !in_cone(u0); ++tries, eps *= 2.0) {
        for (size_t q = 0; q < G.unknowns().size(); ++q) {
            const Eigen::Vector2d d = G.point(G.unknowns()[q]) - dom.center.head<2>();
            u0[static_cast<int>(q)] += eps * 0.5 * d.squaredNorm();
        }
    }
    const auto f2 = [](const Eigen::Vector2d&) { return 1.0; };  // binom(2,2)
    return solve_hessian_2d_general(dom, 2, h, f2, zero, u0, opt);
}

/// Maximum-principle diagnostics on a converged solution:
///   (a) -u >= dist^2/2, (b) -u >= (r_i/2) dist, (c) max |grad u| on the
///   boundary, (d) max(-u) <= d^2/2, (e) max(-u) <= M^2/2.
struct MaxPrincipleReport {
    bool a_dist_sq = true, b_dist_lin = true, c_grad_on_boundary = true;
    bool d_diam = true, e_m2 = true;
    double worst_a = 0.0, worst_b = 0.0;  // most negative slack
    double interior_grad_max = 0.0, boundary_grad_max = 0.0;
    double max_neg_u = 0.0;
    std::vector<int> offending_nodes;

    [[nodiscard]] bool all_pass() const
    {
        return a_dist_sq && b_dist_lin && c_grad_on_boundary && d_diam && e_m2;
    }
};

[[nodiscard]] inline MaxPrincipleReport max_principle_checks(const GridSolution& sol,
                                                             const geom::DomainConstants& dc,
                                                             double tol = 1e-6)
{
    MaxPrincipleReport rep;
    const auto& nodes = sol.nodes();
    const auto& dist = sol.node_boundary_dist();
    const auto bg = boundary_gradient(sol);
    double max_neg_u = 0.0, int_grad = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const double mu = -nodes[i].u;
        max_neg_u = std::max(max_neg_u, mu);
        int_grad = std::max(int_grad, nodes[i].grad.norm());
        const double sa = mu - 0.5 * dist[i] * dist[i];
        const double sb = mu - 0.5 * dc.r_i * dist[i];
        if (sa < rep.worst_a) rep.worst_a = sa;
        if (sb < rep.worst_b) rep.worst_b = sb;
        if (sa < -tol || sb < -tol) {
            rep.offending_nodes.push_back(nodes[i].flat);
            if (sa < -tol) rep.a_dist_sq = false;
            if (sb < -tol) rep.b_dist_lin = false;
        }
    }
    rep.max_neg_u = max_neg_u;
    rep.interior_grad_max = int_grad;
    rep.boundary_grad_max = bg.M;
    if (int_grad > bg.M * (1.0 + 1e-3) + tol) rep.c_grad_on_boundary = false;
    if (max_neg_u > 0.5 * dc.diameter * dc.diameter + tol) rep.d_diam = false;
    if (max_neg_u > 0.5 * bg.M * bg.M + tol) rep.e_m2 = false;
    return rep;
}

}  // namespace khess::solver
