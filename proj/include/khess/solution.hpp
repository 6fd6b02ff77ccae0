#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "khess/geometry.hpp"
#include "khess/symfun.hpp"

namespace khess::solver {

/// One volume quadrature sample of a solution field.
struct VolumeSample {
    Eigen::VectorXd x;
    double w = 0.0;
    double u = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

struct MinPoint {
    Eigen::VectorXd z;
    double u_min = 0.0;
    double dist_boundary = 0.0;
    bool degenerate = false;
};

/// Common view over a solution of S_k(D^2 u) = binom(n,k), u = 0 on the
/// boundary: volume quadrature samples carrying (u, grad, Hessian), boundary
/// gradient magnitudes aligned with the trace, and the minimum point.
class Solution {
public:
    virtual ~Solution() = default;

    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual int hessian_order() const = 0;  // the k of S_k
    [[nodiscard]] virtual const geom::StarDomain& domain() const = 0;
    [[nodiscard]] virtual const geom::BoundaryTrace& trace() const = 0;
    [[nodiscard]] virtual const std::vector<VolumeSample>& volume_samples() const = 0;
    [[nodiscard]] virtual const std::vector<double>& boundary_grad() const = 0;
    [[nodiscard]] virtual MinPoint min_point() const = 0;
    [[nodiscard]] virtual bool is_grid() const { return false; }
};

/// Mean boundary gradient R = (1/P) int |grad u| dsigma and Rhat = n|O|/P.
struct BoundaryGradientSummary {
    std::vector<double> grad_mag;
    double R = 0.0;
    double Rhat = 0.0;
    double M = 0.0;  // max over boundary samples
};

[[nodiscard]] inline BoundaryGradientSummary boundary_gradient(const Solution& sol)
{
    const auto& tr = sol.trace();
    BoundaryGradientSummary out;
    out.grad_mag = sol.boundary_grad();
    double acc = 0.0, mx = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        acc += out.grad_mag[i] * tr.samples[i].weight;
        mx = std::max(mx, out.grad_mag[i]);
    }
    out.R = acc / tr.perimeter;
    out.Rhat = tr.n * tr.volume / tr.perimeter;
    out.M = mx;
    return out;
}

/// Exact radial solution u(r) = (r^2 - R^2)/2 on the ball B_R, any n, k.
/// D^2 u = I everywhere, so S_k(D^2 u) = binom(n,k) identically and the
/// boundary gradient is R.
class RadialSolution final : public Solution {
public:
    RadialSolution(int n, int k, double R, int trace_m = 256, int radial_nodes = 64)
        : n_(n), k_(k), R_(R)
    {
        if (k < 1 || k > n) throw std::domain_error("RadialSolution: need 1 <= k <= n");
        if (R <= 0.0) throw std::domain_error("RadialSolution: need R > 0");
        dom_ = geom::make_ball(n, R);
        trace_ = geom::boundary_trace(dom_, trace_m);
        bgrad_.assign(trace_.samples.size(), R);

        std::vector<double> gx, gw;
        geom::detail::gauss_legendre(radial_nodes, gx, gw);
        const double sphere = n * geom::omega_n(n);  // |S^{n-1}|
        samples_.resize(radial_nodes);
        for (int i = 0; i < radial_nodes; ++i) {
            const double r = 0.5 * R * (gx[i] + 1.0);
            const double wr = 0.5 * R * gw[i];
            VolumeSample& s = samples_[i];
            s.x = Eigen::VectorXd::Zero(n);
            s.x[0] = r;
            s.w = wr * sphere * std::pow(r, n - 1);
            s.u = u(r);
            s.grad = s.x;  // grad u = x
            s.hess = Eigen::MatrixXd::Identity(n, n);
        }
    }

    [[nodiscard]] double u(double r) const { return 0.5 * (r * r - R_ * R_); }
    [[nodiscard]] double du(double r) const { return r; }
    [[nodiscard]] double radius() const { return R_; }

    [[nodiscard]] int dim() const override { return n_; }
    [[nodiscard]] int hessian_order() const override { return k_; }
    [[nodiscard]] const geom::StarDomain& domain() const override { return dom_; }
    [[nodiscard]] const geom::BoundaryTrace& trace() const override { return trace_; }
    [[nodiscard]] const std::vector<VolumeSample>& volume_samples() const override
    {
        return samples_;
    }
    [[nodiscard]] const std::vector<double>& boundary_grad() const override { return bgrad_; }
    [[nodiscard]] MinPoint min_point() const override
    {
        MinPoint mp;
        mp.z = dom_.center;
        mp.u_min = u(0.0);
        mp.dist_boundary = R_;
        mp.degenerate = false;
        return mp;
    }

private:
    int n_, k_;
    double R_;
    geom::StarDomain dom_;
    geom::BoundaryTrace trace_;
    std::vector<VolumeSample> samples_;
    std::vector<double> bgrad_;
};

/// solve_radial: the closed-form solution object for the ball.
[[nodiscard]] inline RadialSolution solve_radial(int n, int k, double R)
{
    return RadialSolution(n, k, R);
}

/// Closed-form 2D solution on a star domain, used for the quadratic test
/// fixtures. Volume quadrature is Gauss-Legendre in the radial fraction
/// times the periodic trapezoid rule in theta.
class AnalyticSolution2D final : public Solution {
public:
    using ScalarFn = std::function<double(const Eigen::Vector2d&)>;
    using VecFn = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
    using MatFn = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;

    AnalyticSolution2D(geom::StarDomain dom, int k, ScalarFn u, VecFn grad, MatFn hess,
                       Eigen::Vector2d z_min, int trace_m = 512, int radial_nodes = 48)
        : k_(k), dom_(std::move(dom)), u_(std::move(u)), grad_(std::move(grad)),
          hess_(std::move(hess)), z_(std::move(z_min))
    {
        trace_ = geom::boundary_trace(dom_, trace_m);
        bgrad_.resize(trace_.samples.size());
        for (size_t i = 0; i < trace_.samples.size(); ++i) {
            bgrad_[i] = grad_(trace_.samples[i].x.head<2>()).norm();
        }
        std::vector<double> gx, gw;
        geom::detail::gauss_legendre(radial_nodes, gx, gw);
        const int m = static_cast<int>(trace_.samples.size());
        const double dtheta = 2.0 * geom::kPi / m;
        samples_.reserve(static_cast<size_t>(m) * radial_nodes);
        for (int i = 0; i < m; ++i) {
            const double t = trace_.samples[i].param;
            const double rho = dom_.profile.eval(t);
            const Eigen::Vector2d er(std::cos(t), std::sin(t));
            for (int l = 0; l < radial_nodes; ++l) {
                const double r = 0.5 * rho * (gx[l] + 1.0);
                const double wr = 0.5 * rho * gw[l];
                VolumeSample s;
                Eigen::Vector2d x = dom_.center.head<2>() + r * er;
                s.x = x;
                s.w = wr * r * dtheta;
                s.u = u_(x);
                s.grad = grad_(x);
                s.hess = hess_(x);
                samples_.push_back(std::move(s));
            }
        }
    }

    [[nodiscard]] int dim() const override { return 2; }
    [[nodiscard]] int hessian_order() const override { return k_; }
    [[nodiscard]] const geom::StarDomain& domain() const override { return dom_; }
    [[nodiscard]] const geom::BoundaryTrace& trace() const override { return trace_; }
    [[nodiscard]] const std::vector<VolumeSample>& volume_samples() const override
    {
        return samples_;
    }
    [[nodiscard]] const std::vector<double>& boundary_grad() const override { return bgrad_; }
    [[nodiscard]] MinPoint min_point() const override
    {
        MinPoint mp;
        mp.z = z_;
        mp.u_min = u_(z_);
        mp.dist_boundary = geom::dist_to_boundary(dom_, z_);
        mp.degenerate = false;
        return mp;
    }

    [[nodiscard]] double eval_u(const Eigen::Vector2d& x) const { return u_(x); }
    [[nodiscard]] Eigen::Vector2d eval_grad(const Eigen::Vector2d& x) const { return grad_(x); }

private:
    int k_;
    geom::StarDomain dom_;
    ScalarFn u_;
    VecFn grad_;
    MatFn hess_;
    Eigen::Vector2d z_;
    geom::BoundaryTrace trace_;
    std::vector<VolumeSample> samples_;
    std::vector<double> bgrad_;
};

/// The exact torsion solutions on the ellipse x^2/a^2 + y^2/b^2 = 1:
///   k=1: u = (a^2 b^2 / (a^2 + b^2)) (x^2/a^2 + y^2/b^2 - 1), Laplacian 2;
///   k=2: u = (ab/2) (x^2/a^2 + y^2/b^2 - 1), det D^2 u = 1.
[[nodiscard]] inline AnalyticSolution2D ellipse_fixture(double a, double b, int k,
                                                        int trace_m = 512)
{
    double c;
    if (k == 1) {
        c = a * a * b * b / (a * a + b * b);
    } else if (k == 2) {
        c = 0.5 * a * b;
    } else {
        throw std::domain_error("ellipse_fixture: k must be 1 or 2");
    }
    // project the polar ellipse profile onto a cosine series
    const int J = 128, N = 8192;
    Eigen::VectorXd cc = Eigen::VectorXd::Zero(J + 1);
    for (int j = 0; j <= J; ++j) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            const double t = 2.0 * geom::kPi * i / N;
            const double rho = a * b / std::sqrt(b * b * std::cos(t) * std::cos(t) +
                                                 a * a * std::sin(t) * std::sin(t));
            acc += rho * std::cos(j * t);
        }
        cc[j] = (j == 0 ? 1.0 : 2.0) * acc / N;
    }
    geom::StarDomain dom = geom::make_curve2d(cc);
    auto u = [=](const Eigen::Vector2d& x) {
        return c * (x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) - 1.0);
    };
    auto grad = [=](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(2.0 * c * x[0] / (a * a), 2.0 * c * x[1] / (b * b));
    };
    auto hess = [=](const Eigen::Vector2d&) {
        Eigen::Matrix2d H;
        H << 2.0 * c / (a * a), 0.0, 0.0, 2.0 * c / (b * b);
        return H;
    };
    return AnalyticSolution2D(std::move(dom), k, u, grad, hess, Eigen::Vector2d(0, 0), trace_m);
}

}  // namespace khess::solver
