#include "anomalyscan/volmodels.hpp"

#include "anomalyscan/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace anomalyscan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLog2Pi = 1.8378770664093454835606594728112; // log(2 pi)
constexpr std::size_t kNp = GarchParams::kCount;
using Grad = std::array<double, kNp>;

double leverage(const GarchParams& p, const GarchSpec& spec) noexcept {
    return spec.has_leverage() ? p.xi : 0.0;
}

struct Evaluation {
    double loglik = -std::numeric_limits<double>::infinity();
    Grad grad{};
};

// Log-likelihood and, when requested, its gradient in natural parameters.
Evaluation evaluate(std::span<const double> y, const GarchParams& p, const GarchSpec& spec, bool want_grad,
                    std::vector<double>* variance_out = nullptr) {
    Evaluation ev;
    const std::size_t n = y.size() - 1;
    const double xi = leverage(p, spec);

    std::vector<double> e(n);
    double e_mean = 0.0;
    double lag_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = y[i + 1] - p.c - p.phi * y[i];
        e_mean += e[i];
        lag_mean += y[i];
    }
    e_mean /= static_cast<double>(n);
    lag_mean /= static_cast<double>(n);

    double h = 0.0;
    double dh_dphi0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = e[i] - e_mean;
        h += d * d;
        dh_dphi0 += d * (lag_mean - y[i]);
    }
    h /= static_cast<double>(n);
    dh_dphi0 *= 2.0 / static_cast<double>(n);

    // dh/d(c, phi, k, gamma, alpha, xi); dh_0/dc vanishes because the
    // residual mean absorbs a shift in c.
    Grad dh{0.0, dh_dphi0, 0.0, 0.0, 0.0, 0.0};
    Grad g{};
    double ll = 0.0;
    if (variance_out) variance_out->assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double ep = e[i - 1];
            const double ep2 = ep * ep;
            const bool neg = ep < 0.0;
            const double a = p.alpha + (neg ? xi : 0.0);
            const double h_prev = h;
            h = p.k + p.gamma * h_prev + a * ep2;
            if (want_grad) {
                // de_{i-1}/dc = -1, de_{i-1}/dphi = -y[i-1]
                const double twice_ae = 2.0 * a * ep;
                Grad next;
                next[0] = p.gamma * dh[0] - twice_ae;
                next[1] = p.gamma * dh[1] - twice_ae * y[i - 1];
                next[2] = 1.0 + p.gamma * dh[2];
                next[3] = h_prev + p.gamma * dh[3];
                next[4] = ep2 + p.gamma * dh[4];
                next[5] = (spec.has_leverage() && neg ? ep2 : 0.0) + p.gamma * dh[5];
                dh = next;
            }
        }
        if (!(h > 0.0) || !std::isfinite(h)) {
            ev.loglik = -std::numeric_limits<double>::infinity();
            return ev;
        }
        if (variance_out) (*variance_out)[i] = h;
        const double ei = e[i];
        const double inv_h = 1.0 / h;
        ll += -0.5 * (kLog2Pi + std::log(h) + ei * ei * inv_h);
        if (want_grad) {
            const double w = -0.5 * (inv_h - ei * ei * inv_h * inv_h);
            const double r = ei * inv_h; // -(e/h) * de/dtheta, de/dc = -1
            for (std::size_t j = 0; j < kNp; ++j) g[j] += w * dh[j];
            g[0] += r;
            g[1] += r * y[i];
        }
    }
    if (!std::isfinite(ll)) return ev;
    ev.loglik = ll;
    ev.grad = g;
    return ev;
}

void require_fit_input(std::span<const double> y) {
    if (y.size() < 60) {
        throw InsufficientDataError("GARCH fit needs at least 60 observations, got " + std::to_string(y.size()));
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw ValidationError("GARCH input contains non-finite values");
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*lo == *hi) throw DegenerateInputError("GARCH input series is constant");
}

// ---------------------------------------------------------------------------
// Unconstrained parameterization
//   u = (c, phi, log k, logit P, a_alpha [, a_xi])
// P is the total persistence gamma + alpha + xi/2. The shares of P going to
// alpha, xi/2 and gamma are softmax(a_alpha, a_xi, 0) for the asymmetric
// model and (logistic(a_alpha), 1 - logistic(a_alpha)) otherwise.
// ---------------------------------------------------------------------------

struct Transform {
    bool leverage;
    std::size_t dim() const noexcept { return leverage ? 6 : 5; }

    GarchParams to_natural(const Eigen::VectorXd& u) const {
        GarchParams p;
        p.c = u[0];
        p.phi = u[1];
        p.k = std::exp(u[2]);
        const double persistence = logistic(u[3]);
        if (leverage) {
            const double m = std::max({u[4], u[5], 0.0});
            const double ea = std::exp(u[4] - m);
            const double ex = std::exp(u[5] - m);
            const double eg = std::exp(-m);
            const double z = ea + ex + eg;
            p.alpha = persistence * ea / z;
            p.xi = 2.0 * persistence * ex / z;
            p.gamma = persistence * eg / z;
        } else {
            const double s = logistic(u[4]);
            p.alpha = persistence * s;
            p.gamma = persistence * (1.0 - s);
        }
        return p;
    }

    Eigen::VectorXd from_natural(const GarchParams& p) const {
        Eigen::VectorXd u(static_cast<Eigen::Index>(dim()));
        const double xi = leverage ? p.xi : 0.0;
        const double persistence = p.gamma + p.alpha + 0.5 * xi;
        u[0] = p.c;
        u[1] = p.phi;
        u[2] = std::log(p.k);
        u[3] = std::log(persistence / (1.0 - persistence));
        if (leverage) {
            u[4] = std::log(p.alpha / p.gamma);
            u[5] = std::log(0.5 * xi / p.gamma);
        } else {
            u[4] = std::log(p.alpha / p.gamma);
        }
        return u;
    }

    // d(natural)/du as a 6 x dim matrix, rows (c, phi, k, gamma, alpha, xi).
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const {
        const auto d = static_cast<Eigen::Index>(dim());
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(6, d);
        const GarchParams p = to_natural(u);
        const double persistence = logistic(u[3]);
        const double dp = persistence * (1.0 - persistence);
        jac(0, 0) = 1.0;
        jac(1, 1) = 1.0;
        jac(2, 2) = p.k;
        if (leverage) {
            const double sa = p.alpha / persistence;
            const double sx = 0.5 * p.xi / persistence;
            const double sg = p.gamma / persistence;
            jac(3, 3) = sg * dp;
            jac(4, 3) = sa * dp;
            jac(5, 3) = 2.0 * sx * dp;
            // softmax derivative ds_i/da_j = s_i (delta_ij - s_j)
            jac(3, 4) = persistence * (-sg * sa);
            jac(4, 4) = persistence * sa * (1.0 - sa);
            jac(5, 4) = 2.0 * persistence * (-sx * sa);
            jac(3, 5) = persistence * (-sg * sx);
            jac(4, 5) = persistence * (-sa * sx);
            jac(5, 5) = 2.0 * persistence * sx * (1.0 - sx);
        } else {
            const double s = logistic(u[4]);
            jac(3, 3) = (1.0 - s) * dp;
            jac(4, 3) = s * dp;
            jac(3, 4) = -persistence * s * (1.0 - s);
            jac(4, 4) = persistence * s * (1.0 - s);
        }
        return jac;
    }

    static double logistic(double x) noexcept {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
};

struct Objective {
    std::span<const double> y;
    GarchSpec spec;
    Transform tr;

    // Negative log-likelihood and its gradient in u.
    double value(const Eigen::VectorXd& u, Eigen::VectorXd* grad) const {
        const GarchParams p = tr.to_natural(u);
        const Evaluation ev = evaluate(y, p, spec, grad != nullptr);
        if (!std::isfinite(ev.loglik)) return std::numeric_limits<double>::infinity();
        if (grad) {
            Eigen::Map<const Eigen::Matrix<double, 6, 1>> g(ev.grad.data());
            *grad = -(tr.jacobian(u).transpose() * g);
        }
        return -ev.loglik;
    }
};

struct RunResult {
    Eigen::VectorXd u;
    double nll = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    std::vector<double> trace;
};

// BFGS on the inverse Hessian with Armijo backtracking. Every accepted step
// strictly lowers the objective.
RunResult bfgs(const Objective& obj, Eigen::VectorXd u, const GarchOptions& opt) {
    RunResult res;
    const auto d = u.size();
    Eigen::VectorXd g(d);
    double f = obj.value(u, &g);
    if (!std::isfinite(f)) return res;
    Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(d, d);
    bool scaled = false;
    res.trace.push_back(-f);

    for (int it = 1; it <= opt.max_iterations; ++it) {
        Eigen::VectorXd dir = -inv_h * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            inv_h.setIdentity();
            dir = -g;
            slope = g.dot(dir);
        }
        if (!(slope < 0.0)) { // zero gradient
            res.converged = true;
            break;
        }
        double step = 1.0;
        Eigen::VectorXd u_new;
        Eigen::VectorXd g_new(d);
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            u_new = u + step * dir;
            f_new = obj.value(u_new, &g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope && f_new < f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent possible along a descent direction: at the optimum
            // up to rounding.
            res.converged = g.lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(1.0, std::abs(f));
            break;
        }
        const Eigen::VectorXd s = u_new - u;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (!scaled) {
                inv_h *= sy / yv.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(d, d);
            inv_h = (ident - rho * s * yv.transpose()) * inv_h * (ident - rho * yv * s.transpose()) +
                    rho * s * s.transpose();
        }
        const double change = std::abs(f - f_new) / std::max(1.0, std::abs(f));
        u = u_new;
        g = g_new;
        f = f_new;
        res.iterations = it;
        res.trace.push_back(-f);
        if (change < opt.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.u = u;
    res.nll = f;
    return res;
}

// Least-squares AR(1) on the standardized data.
std::pair<double, double> ar1_start(std::span<const double> x) {
    const std::size_t n = x.size() - 1;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += x[i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (x[i + 1] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    double phi = sxx > 0.0 ? sxy / sxx : 0.0;
    phi = std::clamp(phi, -0.95, 0.95);
    return {my - phi * mx, phi};
}

} // namespace

bool satisfies_constraints(const GarchParams& p, const GarchSpec& spec) noexcept {
    if (!(p.k > 0.0) || !(p.gamma >= 0.0) || !(p.alpha >= 0.0)) return false;
    if (spec.has_leverage()) return p.xi >= 0.0 && p.gamma + p.alpha + 0.5 * p.xi < 1.0;
    return p.gamma + p.alpha < 1.0;
}

double garch_loglik(std::span<const double> y, const GarchParams& p, const GarchSpec& spec) {
    if (y.size() < 3) throw InsufficientDataError("GARCH likelihood needs at least 3 observations");
    return evaluate(y, p, spec, false).loglik;
}

std::array<double, GarchParams::kCount> garch_loglik_gradient(std::span<const double> y, const GarchParams& p,
                                                              const GarchSpec& spec) {
    if (y.size() < 3) throw InsufficientDataError("GARCH likelihood needs at least 3 observations");
    return evaluate(y, p, spec, true).grad;
}

std::vector<double> garch_variance_path(std::span<const double> y, const GarchParams& p, const GarchSpec& spec) {
    if (y.size() < 3) throw InsufficientDataError("GARCH recursion needs at least 3 observations");
    std::vector<double> out;
    evaluate(y, p, spec, false, &out);
    return out;
}

GarchFit fit_garch(std::span<const double> y, const GarchSpec& spec, const GarchOptions& options) {
    require_fit_input(y);
    const std::size_t n = y.size();

    // Fit on standardized data; the model is equivariant under affine maps of y.
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (y[i] - mean) / sd;

    const Transform tr{spec.has_leverage()};
    const Objective obj{x, spec, tr};
    const auto [c0, phi0] = ar1_start(x);

    struct Start {
        double gamma, alpha, xi;
    };
    const Start sym_starts[] = {{0.85, 0.10, 0.0}, {0.60, 0.30, 0.0}, {0.95, 0.03, 0.0}};
    const Start asym_starts[] = {{0.85, 0.05, 0.05}, {0.60, 0.20, 0.10}, {0.93, 0.03, 0.02}};
    const auto& starts = tr.leverage ? asym_starts : sym_starts;

    RunResult best;
    for (const Start& s : starts) {
        GarchParams p0;
        p0.c = c0;
        p0.phi = phi0;
        p0.gamma = s.gamma;
        p0.alpha = s.alpha;
        p0.xi = s.xi;
        const double persistence = s.gamma + s.alpha + 0.5 * s.xi;
        p0.k = std::max(1e-6, (1.0 - persistence));
        RunResult run = bfgs(obj, tr.from_natural(p0), options);
        if (run.nll < best.nll) best = std::move(run);
    }
    if (!std::isfinite(best.nll)) throw ComputationError("GARCH likelihood is not finite at any starting point");

    const GarchParams ps = tr.to_natural(best.u);

    // Observed information in standardized natural coordinates.
    const std::size_t dim = tr.leverage ? 6 : 5;
    Eigen::MatrixXd hess(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto base = ps.to_array();
    for (std::size_t j = 0; j < dim; ++j) {
        const double h = 1e-5 * std::max(std::abs(base[j]), 1e-1);
        auto up = base;
        auto dn = base;
        up[j] += h;
        dn[j] -= h;
        const auto gu = evaluate(x, GarchParams::from_array(up), spec, true).grad;
        const auto gd = evaluate(x, GarchParams::from_array(dn), spec, true).grad;
        for (std::size_t i = 0; i < dim; ++i) {
            hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (gu[i] - gd[i]) / (2.0 * h);
        }
    }
    hess = 0.5 * (hess + hess.transpose()).eval();

    // Map covariance to the original scale: c = sd c' + mean (1 - phi), k = sd^2 k'.
    Eigen::MatrixXd map = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    map(0, 0) = sd;
    map(0, 1) = -mean;
    map(2, 2) = sd * sd;

    std::array<double, 6> se;
    se.fill(kNaN);
    Eigen::LLT<Eigen::MatrixXd> info(-hess);
    if (info.info() == Eigen::Success) {
        const Eigen::MatrixXd cov_std = info.solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
        const Eigen::MatrixXd cov = map * cov_std * map.transpose();
        for (std::size_t i = 0; i < dim; ++i) {
            se[i] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
        }
    }
    if (!tr.leverage) se[5] = 0.0;

    GarchFit fit;
    fit.spec = spec;
    fit.params = ps;
    fit.params.c = sd * ps.c + mean * (1.0 - ps.phi);
    fit.params.k = sd * sd * ps.k;
    if (!tr.leverage) fit.params.xi = 0.0;
    fit.std_errors = GarchParams::from_array(se);
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    const double shift = static_cast<double>(n - 1) * std::log(sd);
    fit.loglik = garch_loglik(y, fit.params, spec);
    fit.loglik_trace = best.trace;
    for (double& v : fit.loglik_trace) v -= shift;
    fit.cond_variance = garch_variance_path(y, fit.params, spec);
    return fit;
}

} // namespace anomalyscan
