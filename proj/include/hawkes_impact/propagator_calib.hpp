#pragma once

#include "hawkes_impact/events.hpp"
#include "hawkes_impact/newton.hpp"
#include "hawkes_impact/parallel.hpp"
#include "hawkes_impact/specs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hawkes_impact {

using PropagatorFn = std::function<double(double)>; // age (hours) -> fractional impact

struct RegressionConfig {
    double reg_window = 0.5;                       // regression horizon (hours)
    std::vector<double> lag_grid_sec = {0.0, 2.0, 4.0, 6.0};
    std::vector<double> rho_grid = {6.0, 60.0, 120.0, 360.0};
    int knots = 20;                                // unconstrained grid size
    double knot_span = 0.2;                        // last knot time (hours)
    NewtonOptions newton;
    int threads = 1;

    void validate() const {
        if (reg_window < 0.1 || reg_window > 1.0)
            throw error("RegressionConfig: reg_window must lie in [0.1, 1]");
        if (lag_grid_sec.empty() || rho_grid.empty() || knots < 2 || knot_span <= 0.0)
            throw error("RegressionConfig: empty grids");
        for (std::size_t i = 0; i < rho_grid.size(); ++i)
            if (rho_grid[i] <= 0.0 || (i > 0 && rho_grid[i] <= rho_grid[i - 1]))
                throw error("RegressionConfig: rho grid must be positive and increasing");
    }
};

struct PropagatorFit {
    PropagatorSpec spec;                 // meaningful for mono / multi fits
    double r2 = 0.0;
    double sigma_hat = 0.0;
    double error = 0.0;                  // quadratic error at the optimum
    std::string kind;                    // unconstrained | mono | multi
    std::vector<double> knot_times;      // unconstrained fits only
    std::vector<double> knot_values;
    bool rho_identifiable = true;        // false when under 1% of the impact is transient
    std::vector<std::string> trace;      // mono protocol step log
};

// ---------------------------------------------------------------------------
// Prepared regression data
// ---------------------------------------------------------------------------

/// Per-day data reduced to what the propagator regression needs.
struct RegressionDay {
    std::vector<double> trade_time;
    std::vector<double> trade_jump;
    std::vector<double> theta_time;  // quote-driven jump times in (reg_window, T)
    std::vector<double> theta_y;     // P_theta - P_{theta - reg_window}
    double jump_total = 0.0;         // P_T - P_0, all events
    double horizon = 0.0;
};

inline RegressionDay prepare_regression_day(const DayWindow& w, double reg_window) {
    RegressionDay d;
    d.horizon = w.horizon;
    std::size_t lag_idx = 0; // first event with time > theta - reg_window
    double lag_prefix = 0.0; // sum of jumps with time <= theta - reg_window
    double prefix = 0.0;
    for (const auto& e : w.events) d.jump_total += e.price_jump;
    for (const auto& e : w.events) {
        if (e.is_trade()) {
            d.trade_time.push_back(e.time);
            d.trade_jump.push_back(e.price_jump);
        }
        prefix += e.price_jump;
        if (!e.is_trade() && e.time > reg_window && e.time < w.horizon) {
            while (lag_idx < w.events.size() && w.events[lag_idx].time <= e.time - reg_window)
                lag_prefix += w.events[lag_idx++].price_jump;
            d.theta_time.push_back(e.time);
            d.theta_y.push_back(prefix - lag_prefix);
        }
    }
    return d;
}

inline std::vector<RegressionDay> prepare_regression(const std::vector<DayWindow>& windows,
                                                     double reg_window, int threads = 1) {
    return parallel_map<RegressionDay>(
        windows.size(), threads,
        [&](std::size_t i) { return prepare_regression_day(windows[i], reg_window); });
}

// ---------------------------------------------------------------------------
// Reference (direct-sum) operations
// ---------------------------------------------------------------------------

/// Predicted price per the windowed regression model:
/// P(t - reg_window) + sum of trade jumps in (t - reg_window, t] weighted by G.
inline double predict_price(const DayWindow& w, const PropagatorFn& G, double reg_window,
                            double t) {
    if (t <= reg_window || t >= w.horizon) throw error("predict_price: t outside (reg_window, T)");
    double p = w.mid_at(t - reg_window);
    for (const auto& e : w.events) {
        if (e.time > t) break;
        if (e.is_trade() && e.time >= t - reg_window) p += e.price_jump * G(t - e.time);
    }
    return p;
}

/// Quadratic prediction error accumulated over quote-driven jump times.
inline double quadratic_error(const std::vector<DayWindow>& windows, const PropagatorFn& G,
                              double reg_window) {
    double err = 0.0;
    std::size_t n_theta = 0;
    for (const auto& w : windows) {
        if (reg_window >= w.horizon) throw error("quadratic_error: reg_window >= horizon");
        for (const auto& e : w.events) {
            if (e.is_trade() || e.time <= reg_window || e.time >= w.horizon) continue;
            double r = predict_price(w, G, reg_window, e.time) - w.mid_at(e.time);
            err += r * r;
            ++n_theta;
        }
    }
    if (n_theta == 0) throw error("quadratic_error: no quote events in the regression range");
    return err;
}

// ---------------------------------------------------------------------------
// Fast per-day accumulation
// ---------------------------------------------------------------------------

namespace detail {

// Exponential moments sum dM * u^k exp(-rho u), k = 0,1,2, advanced in event order.
struct ExpMoments {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    double anchor = 0.0;

    void advance(double t, double rho) {
        double dt = t - anchor;
        if (dt <= 0.0) {
            anchor = t;
            return;
        }
        double decay = std::exp(-rho * dt);
        m2 = decay * (m2 + 2.0 * dt * m1 + dt * dt * m0);
        m1 = decay * (m1 + dt * m0);
        m0 = decay * m0;
        anchor = t;
    }

    void add(double jump, double age, double rho) {
        double decay = std::exp(-rho * age);
        m0 += jump * decay;
        m1 += jump * age * decay;
        m2 += jump * age * age * decay;
    }
};

// Terms entering the ramp segment of the propagator for one theta.
struct YoungTerms {
    double c = 0.0;   // sum dM over trades with age <= lag
    double u = 0.0;   // sum dM * age / lag
    double e0 = 0.0;  // sum dM * exp(-rho age), one entry per rho
    double e1 = 0.0;  // sum dM * age * exp(-rho age)
    double e2 = 0.0;
};

// Fold over theta times of one day: calls visit(theta_index, window moments per
// rho, young terms per rho, sum of window jumps C).
template <typename Visit>
void scan_day(const RegressionDay& d, const std::vector<double>& rhos, double reg_window,
              double lag, Visit&& visit) {
    std::size_t nr = rhos.size();
    std::vector<ExpMoments> main_m(nr), old_m(nr);
    double main_c = 0.0, old_c = 0.0;
    std::size_t add_idx = 0, old_idx = 0, young_lo = 0;
    std::vector<ExpMoments> window(nr);
    std::vector<YoungTerms> young(nr);

    for (std::size_t ti = 0; ti < d.theta_time.size(); ++ti) {
        double theta = d.theta_time[ti];
        // absorb trades up to theta at their own times
        while (add_idx < d.trade_time.size() && d.trade_time[add_idx] <= theta) {
            for (std::size_t r = 0; r < nr; ++r) {
                main_m[r].advance(d.trade_time[add_idx], rhos[r]);
                main_m[r].add(d.trade_jump[add_idx], 0.0, rhos[r]);
            }
            main_c += d.trade_jump[add_idx];
            ++add_idx;
        }
        // retire trades older than the regression window
        while (old_idx < d.trade_time.size() && d.trade_time[old_idx] < theta - reg_window) {
            double age = theta - d.trade_time[old_idx];
            for (std::size_t r = 0; r < nr; ++r) {
                old_m[r].advance(theta, rhos[r]);
                old_m[r].add(d.trade_jump[old_idx], age, rhos[r]);
            }
            old_c += d.trade_jump[old_idx];
            ++old_idx;
        }
        double window_c = main_c - old_c;
        for (std::size_t r = 0; r < nr; ++r) {
            main_m[r].advance(theta, rhos[r]);
            old_m[r].advance(theta, rhos[r]);
            window[r].m0 = main_m[r].m0 - old_m[r].m0;
            window[r].m1 = main_m[r].m1 - old_m[r].m1;
            window[r].m2 = main_m[r].m2 - old_m[r].m2;
        }
        // trades inside the adjustment lag
        for (auto& y : young) y = YoungTerms{};
        if (lag > 0.0) {
            while (young_lo < d.trade_time.size() && d.trade_time[young_lo] < theta - lag)
                ++young_lo;
            for (std::size_t j = young_lo; j < d.trade_time.size() && d.trade_time[j] <= theta; ++j) {
                double age = theta - d.trade_time[j];
                double jump = d.trade_jump[j];
                for (std::size_t r = 0; r < nr; ++r) {
                    double decay = std::exp(-rhos[r] * age);
                    young[r].c += jump;
                    young[r].u += jump * age / lag;
                    young[r].e0 += jump * decay;
                    young[r].e1 += jump * age * decay;
                    young[r].e2 += jump * age * age * decay;
                }
            }
        }
        visit(ti, window, young, window_c);
    }
}

// Least-squares system for a linearly parameterized propagator.
struct LinearSystem {
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    double yty = 0.0; // sum of (y - offset)^2

    LinearSystem() = default;
    explicit LinearSystem(std::size_t dim)
        : xtx(Eigen::MatrixXd::Zero(dim, dim)), xty(Eigen::VectorXd::Zero(dim)) {}

    LinearSystem& operator+=(const LinearSystem& o) {
        xtx += o.xtx;
        xty += o.xty;
        yty += o.yty;
        return *this;
    }

    void add_point(const Eigen::VectorXd& x, double y_adj) {
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(x);
        xty += x * y_adj;
        yty += y_adj * y_adj;
    }

    void finalize() { xtx = xtx.selfadjointView<Eigen::Lower>(); }
};

} // namespace detail

// ---------------------------------------------------------------------------
// r^2 and sigma
// ---------------------------------------------------------------------------

/// r^2 of the windowed regression with the mean-adjusted denominator.
inline double compute_r2(const std::vector<DayWindow>& windows, const PropagatorFn& G,
                         double reg_window) {
    double err = quadratic_error(windows, G, reg_window);
    double y_sum = 0.0, y_sq = 0.0;
    std::size_t n = 0;
    for (const auto& w : windows) {
        for (const auto& e : w.events) {
            if (e.is_trade() || e.time <= reg_window || e.time >= w.horizon) continue;
            double y = w.mid_at(e.time) - w.mid_at(e.time - reg_window);
            y_sum += y;
            y_sq += y * y;
            ++n;
        }
    }
    double denom = y_sq - y_sum * y_sum / static_cast<double>(n);
    if (denom <= 0.0) throw error("compute_r2: degenerate target variance");
    return 1.0 - err / denom;
}

/// A-posteriori noise volatility from the full-window terminal residuals.
inline double estimate_sigma(const std::vector<DayWindow>& windows, const PropagatorFn& G) {
    if (windows.empty()) throw error("estimate_sigma: no windows");
    double acc = 0.0, hours = 0.0;
    for (const auto& w : windows) {
        double pred = 0.0;
        for (const auto& e : w.events)
            if (e.is_trade()) pred += e.price_jump * G(w.horizon - e.time);
        double resid = (w.mid_end() - w.base_mid) - pred;
        acc += resid * resid;
        hours += w.horizon;
    }
    return std::sqrt(acc / hours);
}

namespace detail {

inline PropagatorFn fit_as_function(const PropagatorFit& fit) {
    if (fit.kind == "unconstrained") {
        auto times = fit.knot_times;
        auto values = fit.knot_values;
        return [times, values](double u) {
            if (u <= 0.0) return 1.0;
            if (u >= times.back()) return values.back();
            std::size_t i = 0;
            while (i + 1 < times.size() && times[i + 1] < u) ++i;
            double t0 = times[i], t1 = times[i + 1];
            return (values[i] * (t1 - u) + values[i + 1] * (u - t0)) / (t1 - t0);
        };
    }
    PropagatorSpec spec = fit.spec;
    return [spec](double u) { return spec.value(u); };
}

struct TargetMoments {
    double y_sum = 0.0;
    double y_sq_sum = 0.0;
    std::size_t n = 0;
};

inline TargetMoments target_moments(const std::vector<RegressionDay>& days) {
    TargetMoments t;
    for (const auto& d : days)
        for (double y : d.theta_y) {
            t.y_sum += y;
            t.y_sq_sum += y * y;
            ++t.n;
        }
    return t;
}

inline void attach_quality(PropagatorFit& fit, const std::vector<DayWindow>& windows,
                           const TargetMoments& tm, double err) {
    fit.error = err;
    double denom = tm.y_sq_sum - tm.y_sum * tm.y_sum / static_cast<double>(tm.n);
    fit.r2 = denom > 0.0 ? 1.0 - err / denom : 0.0;
    fit.sigma_hat = estimate_sigma(windows, fit_as_function(fit));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Unconstrained piecewise-linear fit
// ---------------------------------------------------------------------------

inline PropagatorFit fit_unconstrained(const std::vector<DayWindow>& windows,
                                       const RegressionConfig& cfg) {
    cfg.validate();
    auto days = prepare_regression(windows, cfg.reg_window, cfg.threads);
    std::size_t n_theta = 0;
    for (const auto& d : days) n_theta += d.theta_time.size();
    if (n_theta == 0) throw error("fit_unconstrained: no quote events to regress on");

    int l = cfg.knots;
    double step = cfg.knot_span / static_cast<double>(l);
    auto day_system = parallel_map<detail::LinearSystem>(
        days.size(), cfg.threads, [&](std::size_t di) {
            const auto& d = days[di];
            detail::LinearSystem sys(l);
            Eigen::VectorXd x(l);
            std::size_t lo = 0;
            for (std::size_t ti = 0; ti < d.theta_time.size(); ++ti) {
                double theta = d.theta_time[ti];
                while (lo < d.trade_time.size() && d.trade_time[lo] < theta - cfg.reg_window) ++lo;
                x.setZero();
                double offset = 0.0;
                for (std::size_t j = lo; j < d.trade_time.size() && d.trade_time[j] <= theta; ++j) {
                    double u = theta - d.trade_time[j];
                    double jump = d.trade_jump[j];
                    if (u >= cfg.knot_span) {
                        x(l - 1) += jump; // flat extension beyond the last knot
                        continue;
                    }
                    auto k = static_cast<int>(u / step);
                    double w_hi = u / step - k;
                    if (k == 0)
                        offset += jump * (1.0 - w_hi); // g0 = 1 fixed
                    else
                        x(k - 1) += jump * (1.0 - w_hi);
                    x(k) += jump * w_hi;
                }
                sys.add_point(x, d.theta_y[ti] - offset);
            }
            return sys;
        });
    detail::LinearSystem sys(l);
    for (const auto& s : day_system) sys += s;
    sys.finalize();

    for (int k = 0; k < l; ++k)
        if (sys.xtx(k, k) <= 0.0)
            throw error("fit_unconstrained: no trades support knot " + std::to_string(k + 1) +
                        " (t = " + std::to_string((k + 1) * step) + " h); normal matrix is singular");

    NewtonObjective obj;
    obj.value = [&](const Eigen::VectorXd& g) {
        return sys.yty - 2.0 * g.dot(sys.xty) + g.dot(sys.xtx * g);
    };
    obj.eval = [&](const Eigen::VectorXd& g, double& v, Eigen::VectorXd& grad, Eigen::MatrixXd& h) {
        v = obj.value(g);
        grad = 2.0 * (sys.xtx * g - sys.xty);
        h = 2.0 * sys.xtx;
    };
    Eigen::VectorXd g = newton_step(obj, Eigen::VectorXd::Zero(l));

    PropagatorFit fit;
    fit.kind = "unconstrained";
    fit.knot_times.resize(l + 1);
    fit.knot_values.resize(l + 1);
    fit.knot_times[0] = 0.0;
    fit.knot_values[0] = 1.0;
    for (int k = 0; k < l; ++k) {
        fit.knot_times[k + 1] = (k + 1) * step;
        fit.knot_values[k + 1] = g(k);
    }
    detail::attach_quality(fit, windows, detail::target_moments(days), obj.value(g));
    return fit;
}

// ---------------------------------------------------------------------------
// Multi-exponential resilience fit with weight pruning
// ---------------------------------------------------------------------------

inline PropagatorFit fit_multi_resilience(const std::vector<DayWindow>& windows,
                                          const RegressionConfig& cfg, double lag_sec) {
    cfg.validate();
    double lag = lag_sec / 3600.0;
    auto days = prepare_regression(windows, cfg.reg_window, cfg.threads);
    std::size_t n_theta = 0, n_trades = 0;
    for (const auto& d : days) {
        n_theta += d.theta_time.size();
        n_trades += d.trade_time.size();
    }
    if (n_theta == 0) throw error("fit_multi_resilience: no quote events to regress on");
    if (n_trades == 0) throw error("fit_multi_resilience: no trade jumps to regress with");

    std::vector<double> rhos = cfg.rho_grid;
    bool with_nu = true; // permanent column, pruned as a last resort
    std::vector<std::string> trace;
    while (true) {
        std::size_t m = rhos.size();
        std::size_t dim = m + (with_nu ? 1 : 0);
        std::size_t off = with_nu ? 1 : 0;
        // columns: [nu_bar,] lambda_bar_1 .. lambda_bar_m
        auto day_system = parallel_map<detail::LinearSystem>(
            days.size(), cfg.threads, [&](std::size_t di) {
                detail::LinearSystem sys(dim);
                Eigen::VectorXd x(dim);
                detail::scan_day(
                    days[di], rhos, cfg.reg_window, lag,
                    [&](std::size_t ti, const std::vector<detail::ExpMoments>& win,
                        const std::vector<detail::YoungTerms>& young, double window_c) {
                        const auto& d = days[di];
                        double cy = young[0].c;
                        double uy = young[0].u;
                        if (with_nu) x(0) = window_c - cy + uy;
                        double offset = cy - uy; // sum dM (1 - u/lag) over ramp trades
                        for (std::size_t r = 0; r < m; ++r)
                            x(off + r) = win[r].m0 - young[r].e0 + std::exp(-rhos[r] * lag) * uy;
                        sys.add_point(x, d.theta_y[ti] - offset);
                    });
                return sys;
            });
        detail::LinearSystem sys(dim);
        for (const auto& s : day_system) sys += s;
        sys.finalize();

        NewtonObjective obj;
        obj.value = [&](const Eigen::VectorXd& p) {
            return sys.yty - 2.0 * p.dot(sys.xty) + p.dot(sys.xtx * p);
        };
        obj.eval = [&](const Eigen::VectorXd& p, double& v, Eigen::VectorXd& grad,
                       Eigen::MatrixXd& h) {
            v = obj.value(p);
            grad = 2.0 * (sys.xtx * p - sys.xty);
            h = 2.0 * sys.xtx;
        };
        Eigen::VectorXd p = newton_step(obj, Eigen::VectorXd::Zero(dim));

        // prune the most negative weight and restart with one speed less
        int worst = -1;
        double worst_w = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            if (p(off + r) <= 0.0 && (worst < 0 || p(off + r) < worst_w)) {
                worst = static_cast<int>(r);
                worst_w = p(off + r);
            }
        }
        if (worst >= 0) {
            rhos.erase(rhos.begin() + worst);
            if (rhos.empty())
                throw error("fit_multi_resilience: all transient weights pruned; degenerate fit");
            continue;
        }
        if (with_nu && p(0) <= 0.0) {
            with_nu = false; // pure transient impact
            trace.push_back("permanent part non-positive, refit with nu = 0");
            continue;
        }

        double nu_bar = with_nu ? p(0) : 0.0;
        double gamma = nu_bar + p.tail(m).sum();
        if (gamma <= 0.0) throw error("fit_multi_resilience: non-positive amplification");
        PropagatorFit fit;
        fit.kind = "multi";
        std::vector<double> lambdas(m);
        for (std::size_t r = 0; r < m; ++r) lambdas[r] = p(off + r) / gamma;
        fit.spec = PropagatorSpec::make(gamma, lambdas, rhos, lag);
        fit.trace = std::move(trace);
        detail::attach_quality(fit, windows, detail::target_moments(days), obj.value(p));
        return fit;
    }
}

struct LagSelection {
    double lag_sec = 0.0;
    PropagatorFit fit;                              // multi fit at the best lag
    std::vector<std::pair<double, double>> r2_table; // (lag seconds, r^2)
};

/// Fits the multi-exponential resilience for every candidate lag and keeps the
/// one with the highest regression r^2.
inline LagSelection select_adjustment_lag(const std::vector<DayWindow>& windows,
                                          const RegressionConfig& cfg) {
    cfg.validate();
    LagSelection sel;
    bool first = true;
    for (double lag_sec : cfg.lag_grid_sec) {
        PropagatorFit fit = fit_multi_resilience(windows, cfg, lag_sec);
        sel.r2_table.emplace_back(lag_sec, fit.r2);
        if (first || fit.r2 > sel.fit.r2) {
            sel.lag_sec = lag_sec;
            sel.fit = fit;
            first = false;
        }
    }
    return sel;
}

// ---------------------------------------------------------------------------
// Mono-exponential resilience fit (multi-step protocol)
// ---------------------------------------------------------------------------

namespace detail {

// Quadratic error and derivatives for the mono resilience in one of two
// parameterizations:
//  general: p = (nu_bar, lambda_bar, rho)
//  unit:    p = (lambda, rho) at fixed gamma, R = gamma [1 - lambda (1 - e^{-rho t})]
struct MonoErrorEngine {
    const std::vector<RegressionDay>* days;
    double reg_window;
    double lag; // hours
    int threads = 1;

    struct Terms {
        double value = 0.0;
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
    };

    template <typename PerTheta>
    Terms accumulate(std::size_t dim, double rho, PerTheta&& per_theta) const {
        std::vector<double> rhos{rho};
        auto parts = parallel_map<Terms>((*days).size(), threads, [&](std::size_t di) {
            Terms t;
            t.grad = Eigen::VectorXd::Zero(dim);
            t.hess = Eigen::MatrixXd::Zero(dim, dim);
            scan_day(
                (*days)[di], rhos, reg_window, lag,
                [&](std::size_t ti, const std::vector<ExpMoments>& win,
                    const std::vector<YoungTerms>& young, double window_c) {
                    per_theta(t, (*days)[di].theta_y[ti], win[0], young[0], window_c);
                });
            return t;
        });
        Terms total;
        total.grad = Eigen::VectorXd::Zero(dim);
        total.hess = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& p : parts) {
            total.value += p.value;
            total.grad += p.grad;
            total.hess += p.hess;
        }
        return total;
    }

    // Building blocks valid for both parameterizations. For one theta:
    //  A_nu = C - C_y + U_y
    //  A_lam = M0 - E0_y + e^{-rho lag} U_y          (d/drho, d2/drho2 below)
    //  offset = C_y - U_y
    struct Blocks {
        double a_nu, a_lam, da_lam, d2a_lam, offset;
    };

    Blocks blocks(double rho, const ExpMoments& win, const YoungTerms& y, double c) const {
        Blocks b{};
        double e_lag = lag > 0.0 ? std::exp(-rho * lag) : 1.0;
        b.a_nu = c - y.c + y.u;
        b.a_lam = win.m0 - y.e0 + e_lag * y.u;
        b.da_lam = -(win.m1 - y.e1) - lag * e_lag * y.u;
        b.d2a_lam = (win.m2 - y.e2) + lag * lag * e_lag * y.u;
        b.offset = y.c - y.u;
        return b;
    }

    Terms general(const Eigen::VectorXd& p) const {
        double nu_bar = p(0), lam_bar = p(1), rho = p(2);
        return accumulate(3, rho, [&](Terms& t, double y, const ExpMoments& win,
                                      const YoungTerms& yt, double c) {
            Blocks b = blocks(rho, win, yt, c);
            double resid = nu_bar * b.a_nu + lam_bar * b.a_lam + b.offset - y;
            Eigen::Vector3d g(b.a_nu, b.a_lam, lam_bar * b.da_lam);
            t.value += resid * resid;
            t.grad += 2.0 * resid * g;
            t.hess += 2.0 * (g * g.transpose());
            // second derivatives of the prediction
            t.hess(1, 2) += 2.0 * resid * b.da_lam;
            t.hess(2, 1) += 2.0 * resid * b.da_lam;
            t.hess(2, 2) += 2.0 * resid * lam_bar * b.d2a_lam;
        });
    }

    Terms unit(const Eigen::VectorXd& p, double gamma) const {
        double lambda = p(0), rho = p(1);
        return accumulate(2, rho, [&](Terms& t, double y, const ExpMoments& win,
                                      const YoungTerms& yt, double c) {
            Blocks b = blocks(rho, win, yt, c);
            double resid =
                gamma * (1.0 - lambda) * b.a_nu + gamma * lambda * b.a_lam + b.offset - y;
            Eigen::Vector2d g(gamma * (b.a_lam - b.a_nu), gamma * lambda * b.da_lam);
            t.value += resid * resid;
            t.grad += 2.0 * resid * g;
            t.hess += 2.0 * (g * g.transpose());
            t.hess(0, 1) += 2.0 * resid * gamma * b.da_lam;
            t.hess(1, 0) += 2.0 * resid * gamma * b.da_lam;
            t.hess(1, 1) += 2.0 * resid * gamma * lambda * b.d2a_lam;
        });
    }

    double error_at(double nu_bar, double lam_bar, double rho) const {
        Eigen::Vector3d p(nu_bar, lam_bar, rho);
        // value-only pass (gradients unused, still cheap)
        return general(p).value;
    }
};

} // namespace detail

/// Mono-exponential resilience via the staged protocol: full Newton from the
/// multi-fit start, then (on failure) a linear refresh of (nu_bar, lambda_bar),
/// a local (lambda, rho) grid at fixed gamma, a unit-parameterization Newton,
/// and a final full Newton.
inline PropagatorFit fit_mono_resilience(const std::vector<DayWindow>& windows,
                                         const RegressionConfig& cfg, double lag_sec,
                                         const PropagatorFit& multi_fit) {
    cfg.validate();
    if (multi_fit.kind != "multi") throw error("fit_mono_resilience: multi fit required as start");
    auto days = prepare_regression(windows, cfg.reg_window, cfg.threads);
    detail::MonoErrorEngine engine{&days, cfg.reg_window, lag_sec / 3600.0, cfg.threads};

    // starting point: gamma from the multi fit, lambda = sum lambda_i,
    // rho = lambda-weighted mean of the surviving speeds
    const PropagatorSpec& ms = multi_fit.spec;
    double gamma = ms.gamma;
    double lambda = sum(ms.lambdas);
    if (lambda <= 0.0) lambda = 1e-6;
    double rho = 0.0;
    for (std::size_t i = 0; i < ms.rhos.size(); ++i) rho += ms.lambdas[i] / lambda * ms.rhos[i];
    if (rho <= 0.0) rho = cfg.rho_grid.front();

    std::vector<std::string> trace;
    auto spec_of = [&](double nu_bar, double lam_bar, double r) {
        double g = nu_bar + lam_bar;
        if (g <= 0.0 || r <= 0.0) throw error("fit_mono_resilience: invalid parameters reached");
        return PropagatorSpec::make(g, {lam_bar / g}, {r}, lag_sec / 3600.0);
    };

    NewtonObjective full;
    full.value = [&](const Eigen::VectorXd& p) {
        if (p(2) <= 0.0) return std::numeric_limits<double>::infinity();
        return engine.general(p).value;
    };
    full.eval = [&](const Eigen::VectorXd& p, double& v, Eigen::VectorXd& grad,
                    Eigen::MatrixXd& h) {
        auto t = engine.general(p);
        v = t.value;
        grad = t.grad;
        h = t.hess;
    };

    Eigen::Vector3d start(gamma * (1.0 - lambda), gamma * lambda, rho);

    // Step 1: full Newton from the multi start.
    NewtonOutcome out = newton_minimize(full, start, cfg.newton);
    trace.push_back("step1 full newton: " + std::string(out.converged ? "converged" : "failed") +
                    (out.note.empty() ? "" : " (" + out.note + ")"));
    if (!out.converged || out.x(2) <= 0.0 || out.x(0) + out.x(1) <= 0.0) {
        // Step 2: linear refresh of (nu_bar, lambda_bar) at fixed rho.
        auto linear2 = [&](double r) {
            NewtonObjective obj;
            obj.value = [&, r](const Eigen::VectorXd& q) {
                return engine.general(Eigen::Vector3d(q(0), q(1), r)).value;
            };
            obj.eval = [&, r](const Eigen::VectorXd& q, double& v, Eigen::VectorXd& grad,
                              Eigen::MatrixXd& h) {
                auto t = engine.general(Eigen::Vector3d(q(0), q(1), r));
                v = t.value;
                grad = t.grad.head(2);
                h = t.hess.topLeftCorner(2, 2);
            };
            return newton_step(obj, Eigen::Vector2d(0.0, 0.0));
        };
        Eigen::Vector2d nl = linear2(rho);
        trace.push_back("step2 linear (nu_bar, lambda_bar) at rho fixed");

        // Step 3: local grid on (lambda, rho) at fixed gamma.
        double gamma3 = nl(0) + nl(1);
        if (gamma3 <= 0.0) gamma3 = gamma;
        double best_l = std::clamp(nl(1) / gamma3, 0.0, 1.0), best_r = rho;
        double best_e = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 21; ++i) {
            double lam_i = static_cast<double>(i) / 20.0;
            for (int j = 0; j < 21; ++j) {
                double rho_j = rho * std::pow(4.0, static_cast<double>(j - 10) / 10.0);
                double e = engine.error_at(gamma3 * (1.0 - lam_i), gamma3 * lam_i, rho_j);
                if (e < best_e) {
                    best_e = e;
                    best_l = lam_i;
                    best_r = rho_j;
                }
            }
        }
        trace.push_back("step3 grid: lambda = " + std::to_string(best_l) +
                        ", rho = " + std::to_string(best_r));

        // Step 4: unit-parameterization Newton at fixed gamma.
        NewtonObjective unit;
        unit.value = [&](const Eigen::VectorXd& p) {
            if (p(1) <= 0.0) return std::numeric_limits<double>::infinity();
            return engine.unit(p, gamma3).value;
        };
        unit.eval = [&](const Eigen::VectorXd& p, double& v, Eigen::VectorXd& grad,
                        Eigen::MatrixXd& h) {
            auto t = engine.unit(p, gamma3);
            v = t.value;
            grad = t.grad;
            h = t.hess;
        };
        NewtonOutcome u4 = newton_minimize(unit, Eigen::Vector2d(best_l, best_r), cfg.newton);
        trace.push_back("step4 unit newton: " + std::string(u4.converged ? "converged" : "failed"));
        if (u4.converged && u4.x(1) > 0.0) {
            best_l = u4.x(0);
            best_r = u4.x(1);
        }

        // Step 5: final full Newton from the refreshed point.
        start = Eigen::Vector3d(gamma3 * (1.0 - best_l), gamma3 * best_l, best_r);
        out = newton_minimize(full, start, cfg.newton);
        trace.push_back("step5 full newton: " +
                        std::string(out.converged ? "converged" : "failed") +
                        (out.note.empty() ? "" : " (" + out.note + ")"));
        if (!out.converged) {
            std::string msg = "fit_mono_resilience: protocol failed to converge;";
            for (const auto& s : trace) msg += "\n  " + s;
            throw error(msg);
        }
    }

    PropagatorFit fit;
    fit.kind = "mono";
    try {
        fit.spec = spec_of(out.x(0), out.x(1), out.x(2));
    } catch (const error& e) {
        std::string msg = std::string(e.what()) + ";";
        for (const auto& s : trace) msg += "\n  " + s;
        throw error(msg);
    }
    fit.trace = std::move(trace);
    fit.rho_identifiable = fit.spec.lambdas[0] > 1e-2;
    detail::attach_quality(fit, windows, detail::target_moments(days), out.value);
    return fit;
}

} // namespace hawkes_impact
