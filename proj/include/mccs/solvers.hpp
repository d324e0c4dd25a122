#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mccs/prox.hpp"
#include "mccs/rng.hpp"
#include "mccs/tensor.hpp"

namespace mccs {

// Solver building blocks. Vec is any Eigen dense column vector; inner
// products are real parts of the complex inner product.

template <class Vec>
struct SmoothFn {
    std::function<double(const Vec &)> value;
    std::function<Vec(const Vec &)> gradient;
    /// Optional fused oracle; used in place of value+gradient when set.
    std::function<std::pair<double, Vec>(const Vec &)> value_and_gradient;

    std::pair<double, Vec> eval(const Vec &x) const {
        if (value_and_gradient) return value_and_gradient(x);
        return {value(x), gradient(x)};
    }
};

template <class Vec>
struct ProxFn {
    /// g(x); may return +infinity outside the domain.
    std::function<double(const Vec &)> value;
    /// prox(v, t) = argmin_u t g(u) + 1/2 ||u - v||^2.
    std::function<Vec(const Vec &, double)> prox;
};

template <class InVec, class OutVec = InVec>
struct LinOp {
    std::function<OutVec(const InVec &)> apply;
    std::function<InVec(const OutVec &)> adjoint;
};

namespace detail {

template <class Vec>
Vec random_like(const Vec &like, Rng &rng) {
    Vec v(like.size());
    for (Index i = 0; i < v.size(); ++i) {
        if constexpr (std::is_same_v<typename Vec::Scalar, double>)
            v(i) = rng.normal();
        else
            v(i) = rng.complex_normal();
    }
    return v;
}

template <class Vec>
bool finite(const Vec &v) {
    return v.allFinite();
}

} // namespace detail

/// Largest singular value of A by power iteration on A^*A from a seeded start.
template <class InVec, class OutVec>
double estimate_operator_norm(const LinOp<InVec, OutVec> &op, const InVec &like,
                              int iterations = 20, std::uint64_t seed = 0x5eed) {
    Rng rng(seed);
    InVec v = detail::random_like(like, rng);
    v /= v.norm();
    double sigma = 0.0;
    for (int i = 0; i < iterations; ++i) {
        InVec w = op.adjoint(op.apply(v));
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        sigma = std::sqrt(n);
        v = w / n;
    }
    return sigma;
}

// ---------------------------------------------------------------------------
// FISTA with backtracking line search and restarting.

enum class FistaRestart {
    /// restart when <y - x, x - x_prev> > 0 (composite gradient mapping)
    gradient_mapping,
    /// restart when <grad f(y), x - y> > 0; never fires when g = 0
    appendix,
};

struct FistaParams {
    double t0 = 1.0;
    double r = 0.9;  ///< backtracking factor
    double s = 1.25; ///< step growth factor
    int max_iterations = 100;
    /// Stop early once ||x_k - x_{k-1}|| <= tol ||x_{k-1}||; 0 disables.
    double tol = 1e-9;
    double min_step = 1e-14;
    FistaRestart restart = FistaRestart::gradient_mapping;
};

struct FistaIterate {
    double objective = 0.0; ///< f(x_k) + g(x_k)
    double step = 0.0;      ///< accepted t_k
    double theta = 0.0;
    int backtracks = 0;
    bool restarted = false;       ///< gradient-restart test fired after this step
    bool sufficient_decrease = false;
};

struct FistaTrace {
    std::vector<FistaIterate> iterations;
    double final_step = 0.0;
    bool converged_early = false;
};

template <class Vec>
struct FistaResult {
    Vec x;
    FistaTrace trace;
};

template <class Vec>
FistaResult<Vec> fista_ls_restart(const SmoothFn<Vec> &f, const ProxFn<Vec> &g, const Vec &x0,
                                  const FistaParams &p) {
    if (!(p.t0 > 0.0)) throw ConfigError("fista: t0 must be positive");
    if (!(p.r > 0.0 && p.r < 1.0)) throw ConfigError("fista: r must lie in (0,1)");
    if (!(p.s > 1.0)) throw ConfigError("fista: s must exceed 1");
    if (p.max_iterations < 1) throw ConfigError("fista: max_iterations must be >= 1");

    FistaResult<Vec> res;
    Vec x_prev = x0;
    Vec v = x0;
    double t_prev = p.t0;
    double theta_prev = 1.0;
    bool restart = true;

    for (int k = 1; k <= p.max_iterations; ++k) {
        FistaIterate it;
        double t = p.s * t_prev;
        Vec y, x, grad_y;
        double f_y = 0.0, f_x = 0.0, lin = 0.0;
        double theta = 1.0;
        while (true) {
            if (restart) {
                theta = 1.0;
                restart = false;
            } else {
                // positive root of t_prev th^2 + t th_prev^2 th - t th_prev^2 = 0
                const double b = t * theta_prev * theta_prev;
                theta = (-b + std::sqrt(b * b + 4.0 * t_prev * b)) / (2.0 * t_prev);
            }
            y = (1.0 - theta) * x_prev + theta * v;
            auto [fy, gy] = f.eval(y);
            f_y = fy;
            grad_y = std::move(gy);
            x = g.prox(Vec(y - t * grad_y), t);
            f_x = f.value ? f.value(x) : f.eval(x).first;
            if (!std::isfinite(f_x) || !std::isfinite(f_y) || !detail::finite(x))
                throw SolverError("fista: non-finite objective at iteration " + std::to_string(k));
            const Vec dx = x - y;
            lin = real_inner(grad_y, dx);
            if (f_x <= f_y + lin + dx.squaredNorm() / (2.0 * t)) {
                it.sufficient_decrease = true;
                break;
            }
            t *= p.r;
            ++it.backtracks;
            if (t < p.min_step)
                throw SolverError("fista: backtracking step fell below " +
                                  std::to_string(p.min_step) + " at iteration " +
                                  std::to_string(k));
        }

        const double restart_test = p.restart == FistaRestart::appendix
                                        ? lin
                                        : real_inner(y - x, x - x_prev);
        if (restart_test > 0.0) {
            restart = true;
            v = x;
            it.restarted = true;
        } else {
            v = x_prev + (x - x_prev) / theta;
        }

        const double gx = g.value ? g.value(x) : 0.0;
        it.objective = f_x + gx;
        it.step = t;
        it.theta = theta;
        res.trace.iterations.push_back(it);

        const double change = (x - x_prev).norm();
        const double base = x_prev.norm();
        x_prev = std::move(x);
        t_prev = t;
        theta_prev = theta;
        if (p.tol > 0.0 && base > 0.0 && change <= p.tol * base) {
            res.trace.converged_early = true;
            break;
        }
    }
    res.x = std::move(x_prev);
    res.trace.final_step = t_prev;
    return res;
}

// ---------------------------------------------------------------------------
// Primal-dual hybrid gradient with adaptive step (line search on tau).

struct PdhgParams {
    double tau0 = 0.0; ///< <= 0 selects 1 / ||A|| from power iteration
    double beta = 1.0;
    double mu = 0.7;
    double delta = 0.99;
    int max_iterations = 500;
    int max_inner = 50;
    int power_iterations = 20;
    /// Stop early once the primal-dual pair moves by at most tol relative to
    /// its norm; 0 disables.
    double tol = 1e-9;
    /// Evaluate f(x) + g(Ax) after every step (costs one extra apply).
    bool record_objective = false;
};

struct PdhgIterate {
    double tau = 0.0;
    double theta = 0.0;
    int inner = 0;
    bool accepted = false;  ///< step condition verified
    bool inner_cap = false; ///< inner loop hit max_inner, step accepted anyway
    double rel_change = 0.0;
    double objective = std::numeric_limits<double>::quiet_NaN();
};

struct PdhgTrace {
    std::vector<PdhgIterate> iterations;
    double tau0 = 0.0;
    bool converged_early = false;
};

template <class XVec, class YVec>
struct PdhgResult {
    XVec x;
    YVec y;
    PdhgTrace trace;
};

/// Minimize f(x) + g(Ax). `g.prox` is the prox of g; the dual step uses
/// the prox of g* through the Moreau identity.
template <class XVec, class YVec>
PdhgResult<XVec, YVec> pdhg_adaptive(const ProxFn<XVec> &f, const ProxFn<YVec> &g,
                                     const LinOp<XVec, YVec> &A, const XVec &x0, const YVec &y0,
                                     const PdhgParams &p) {
    if (!(p.beta > 0.0)) throw ConfigError("pdhg: beta must be positive");
    if (!(p.mu > 0.0 && p.mu < 1.0)) throw ConfigError("pdhg: mu must lie in (0,1)");
    if (!(p.delta > 0.0 && p.delta < 1.0)) throw ConfigError("pdhg: delta must lie in (0,1)");
    if (p.max_iterations < 1) throw ConfigError("pdhg: max_iterations must be >= 1");

    PdhgResult<XVec, YVec> res;
    double tau = p.tau0;
    if (!(tau > 0.0)) {
        const double nrm = estimate_operator_norm(A, x0, p.power_iterations);
        tau = nrm > 0.0 ? 1.0 / nrm : 1.0;
    }
    res.trace.tau0 = tau;

    XVec x = x0;
    YVec y = y0;
    XVec aty = A.adjoint(y);
    double theta = 1.0;

    for (int k = 0; k < p.max_iterations; ++k) {
        PdhgIterate it;
        const XVec x_next = f.prox(XVec(x - tau * aty), tau);
        double tau_next = tau * std::sqrt(1.0 + theta);
        YVec y_next;
        XVec aty_next;
        double theta_next = 1.0;
        while (true) {
            ++it.inner;
            theta_next = tau_next / tau;
            const XVec x_bar = x_next + theta_next * (x_next - x);
            const double sigma = p.beta * tau_next;
            const auto g_prox = [&](const YVec &v, double s) { return g.prox(v, s); };
            y_next = prox_conjugate(g_prox, YVec(y + sigma * A.apply(x_bar)), sigma);
            aty_next = A.adjoint(y_next);
            const double lhs = tau_next * std::sqrt(p.beta) * (aty_next - aty).norm();
            const double rhs = p.delta * (y_next - y).norm();
            if (lhs <= rhs) {
                it.accepted = true;
                break;
            }
            if (it.inner >= p.max_inner) {
                it.inner_cap = true;
                break;
            }
            tau_next *= p.mu;
        }
        if (!detail::finite(x_next) || !detail::finite(y_next))
            throw SolverError("pdhg: non-finite iterate at iteration " + std::to_string(k + 1));

        // Relative change of the primal-dual pair; the primal part alone can
        // stall at zero on the first step from a zero dual.
        const double base = std::sqrt(x.squaredNorm() + y.squaredNorm());
        const double step = std::sqrt((x_next - x).squaredNorm() + (y_next - y).squaredNorm());
        it.rel_change = base > 0.0 ? step / base : step;
        it.tau = tau_next;
        it.theta = theta_next;
        x = x_next;
        y = std::move(y_next);
        aty = std::move(aty_next);
        tau = tau_next;
        theta = theta_next;
        if (p.record_objective && f.value && g.value) it.objective = f.value(x) + g.value(A.apply(x));
        res.trace.iterations.push_back(it);
        if (p.tol > 0.0 && base > 0.0 && it.rel_change <= p.tol) {
            res.trace.converged_early = true;
            break;
        }
    }
    res.x = std::move(x);
    res.y = std::move(y);
    return res;
}

} // namespace mccs
