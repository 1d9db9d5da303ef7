#pragma once

#include "hawkes_impact/events.hpp"
#include "hawkes_impact/newton.hpp"
#include "hawkes_impact/parallel.hpp"
#include "hawkes_impact/specs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

namespace hawkes_impact {

struct HawkesCalibConfig {
    double bin_width = 1.0 / 360.0;       // h (hours)
    int k_max = 36;                       // autocorrelation lags
    std::vector<double> beta_grid = {6.0, 60.0, 120.0, 360.0};
    double burn_in = 0.25;                // t0 (hours)
    NewtonOptions newton;
    int threads = 1;
};

// ---------------------------------------------------------------------------
// Binned counts and GMM for the mono-exponential kernel
// ---------------------------------------------------------------------------

/// Matrix of trade-driven jump counts, rows = time bins, columns = days.
struct BinnedCounts {
    Eigen::MatrixXd counts;
    double bin_width = 0.0;
    bool normalized = false;

    double mean() const { return counts.mean(); }

    double variance() const {
        double m = mean();
        double acc = (counts.array() - m).square().sum();
        return acc / (static_cast<double>(counts.size()) - 1.0);
    }
};

/// Counts per bin per day; columns are rescaled to share the global mean
/// (days with no trades are left untouched).
inline BinnedCounts bin_counts(const std::vector<DayWindow>& windows, double h) {
    if (windows.empty()) throw error("bin_counts: no windows");
    auto rows = static_cast<Eigen::Index>(windows.front().horizon / h + 1e-9);
    if (rows < 2) throw error("bin_counts: bin width too large");
    BinnedCounts out;
    out.bin_width = h;
    out.counts = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(windows.size()));
    for (std::size_t d = 0; d < windows.size(); ++d) {
        for (const auto& e : windows[d].events) {
            if (!e.is_trade()) continue;
            auto l = static_cast<Eigen::Index>(e.time / h);
            if (l < rows) out.counts(l, static_cast<Eigen::Index>(d)) += 1.0;
        }
    }
    double global = out.counts.mean();
    for (Eigen::Index c = 0; c < out.counts.cols(); ++c) {
        double cm = out.counts.col(c).mean();
        if (cm > 0.0) out.counts.col(c) *= global / cm;
    }
    out.normalized = true;
    return out;
}

/// Empirical autocorrelation of the binned counts for lags 1..k_max.
inline std::vector<double> empirical_autocorrelation(const BinnedCounts& bc, int k_max) {
    const auto& m = bc.counts;
    if (k_max < 1 || k_max >= m.rows()) throw error("empirical_autocorrelation: bad lag range");
    double mean = bc.mean();
    double var = bc.variance();
    if (var <= 0.0) throw error("empirical_autocorrelation: zero variance");
    std::vector<double> acf(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index l = k; l < m.rows(); ++l) acc += m(l, c) * m(l - k, c);
        double pairs = static_cast<double>(m.cols()) * static_cast<double>(m.rows() - k);
        acf[static_cast<std::size_t>(k - 1)] = (acc / pairs - mean * mean) / var;
    }
    return acf;
}

struct GmmEstimate {
    double beta = 0.0;
    double iota = 0.0;
    double kappa_inf = 0.0;
    double kappa_bar = 0.0; // per side
    double d = 0.0;         // beta - iota
    double br_mono = 0.0;
};

/// Inverts the binned-count moments into mono-exponential Hawkes parameters.
/// mean_per_bin and variance refer to the total (buy + sell) count process.
inline GmmEstimate gmm_invert(double mean_per_bin, double variance, double d, double h) {
    if (d <= 0.0) throw error("gmm_invert: autocorrelation decay must be positive");
    GmmEstimate g;
    g.d = d;
    g.kappa_bar = 0.5 * mean_per_bin / h;
    double z = (1.0 - std::exp(-d * h)) / d;
    double ratio = variance / (2.0 * g.kappa_bar);
    if (ratio <= z)
        throw error("gmm_invert: sub-Poisson variance, intensity parameters unidentifiable");
    g.beta = d * std::sqrt((ratio - z) / (h - z));
    g.iota = g.beta - d;
    g.kappa_inf = (1.0 - g.iota / g.beta) * g.kappa_bar;
    g.br_mono = g.iota / g.beta;
    return g;
}

namespace detail {

// Refines the decay of acf(k) ~ A exp(-delta k) + B by Gauss-Newton. The free
// offset absorbs the constant the per-day mean normalization subtracts from
// the covariance curve; without it the decay comes out visibly too steep.
inline double refine_decay_with_offset(const std::vector<double>& acf, double delta0) {
    double delta = delta0;
    double a = acf[0] * std::exp(delta0);
    double b = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < acf.size(); ++i) {
            double k = static_cast<double>(i + 1);
            double e = std::exp(-delta * k);
            double r = a * e + b - acf[i];
            Eigen::Vector3d g(e, -a * k * e, 1.0);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        Eigen::Vector3d step = jtj.ldlt().solve(jtr);
        if (!step.allFinite()) return delta0;
        a -= step(0);
        delta -= step(1);
        b -= step(2);
        if (step.norm() < 1e-12) break;
    }
    bool sane = std::isfinite(delta) && delta > 0.0 && a > 0.0 &&
                std::abs(b) < 0.5 * acf[0];
    return sane ? delta : delta0;
}

} // namespace detail

/// GMM estimate: exponential fit of the autocorrelation decay, then moment
/// inversion. The decay is initialized by unweighted least squares of
/// ln acf(k) over the leading run of positive autocorrelations and refined by
/// an exponential-plus-offset fit of the full curve.
inline GmmEstimate gmm_mono(const BinnedCounts& bc, int k_max) {
    auto acf = empirical_autocorrelation(bc, k_max);
    std::vector<std::pair<double, double>> pts; // (k, ln acf)
    for (std::size_t i = 0; i < acf.size(); ++i) {
        if (acf[i] <= 0.0) break;
        pts.emplace_back(static_cast<double>(i + 1), std::log(acf[i]));
    }
    if (pts.size() < 2) {
        std::string msg = "gmm_mono: not enough positive autocorrelation lags (";
        msg += std::to_string(pts.size()) + " usable of " + std::to_string(acf.size()) + ")";
        throw error(msg);
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(pts.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (slope >= 0.0) throw error("gmm_mono: autocorrelation does not decay");
    double delta = detail::refine_decay_with_offset(acf, -slope);
    return gmm_invert(bc.mean(), bc.variance(), delta / bc.bin_width, bc.bin_width);
}

// ---------------------------------------------------------------------------
// Log-likelihood with analytic derivatives
// ---------------------------------------------------------------------------

/// Trade events of one day in the form used by the likelihood recursions.
struct LikelihoodDay {
    std::vector<double> time;
    std::vector<int> side;      // +1 buy, -1 sell
    std::vector<double> volume;
    std::vector<double> abs_jump;
    double horizon = 0.0;

    static LikelihoodDay from_window(const DayWindow& w) {
        LikelihoodDay d;
        d.horizon = w.horizon;
        for (const auto& e : w.events) {
            if (!e.is_trade()) continue;
            d.time.push_back(e.time);
            d.side.push_back(e.side);
            d.volume.push_back(e.volume);
            d.abs_jump.push_back(std::abs(e.price_jump));
        }
        return d;
    }

    double mark(MarkType type, double m1, double m_bar, std::size_t i) const {
        switch (type) {
            case MarkType::unit: return 1.0;
            case MarkType::volume: return volume[i] / m1;
            case MarkType::price: return abs_jump[i] / m_bar;
        }
        return 1.0;
    }
};

inline std::vector<LikelihoodDay> likelihood_days(const std::vector<DayWindow>& windows,
                                                  int threads = 1) {
    return parallel_map<LikelihoodDay>(windows.size(), threads, [&](std::size_t i) {
        return LikelihoodDay::from_window(windows[i]);
    });
}

struct LoglikResult {
    double total = 0.0;        // sum over days of ln L(J+|k+) + ln L(J-|k-) + 2T
    std::size_t jumps = 0;     // events inside [t0, T] across days
    double per_point = 0.0;
    Eigen::VectorXd gradient;  // d/d(kappa_inf, w_1..w_p) of the total
    Eigen::MatrixXd hessian;
};

/// Log-likelihood of the two-sided flow under `spec`, with analytic gradient
/// and Hessian in (kappa_inf, w_1..w_p). The kernel weights are differentiated
/// without the sum-to-one constraint, matching the free-weight maximization.
///
/// Each side contributes sum ln kappa(at own jumps) - integral of kappa + T;
/// the compensator uses the kernel antiderivative and the jump intensities the
/// per-scale recursions A_i.
inline LoglikResult hawkes_loglik(const std::vector<LikelihoodDay>& days, const HawkesSpec& spec,
                                  double t0, int threads = 1) {
    if (t0 < 0.0) throw error("hawkes_loglik: negative burn-in");
    std::size_t p = spec.scales();
    std::size_t dim = 1 + p;

    auto parts = parallel_map<LoglikResult>(days.size(), threads, [&](std::size_t di) {
        const LikelihoodDay& d = days[di];
        if (t0 >= d.horizon) throw error("hawkes_loglik: burn-in beyond horizon");
        LoglikResult r;
        r.gradient = Eigen::VectorXd::Zero(dim);
        r.hessian = Eigen::MatrixXd::Zero(dim, dim);
        double t_end = d.horizon;

        std::vector<double> exc_plus(d.time.size()), exc_minus(d.time.size());
        for (std::size_t i = 0; i < d.time.size(); ++i) {
            double x = d.mark(spec.mark_type, spec.m1, spec.m_bar, i);
            double self = spec.phi_s(x);
            double cross = spec.phi_c(x);
            exc_plus[i] = d.side[i] > 0 ? self : cross;
            exc_minus[i] = d.side[i] > 0 ? cross : self;
        }

        // jump part: per-scale recursions a_s(i) = sum_{j<i} exc_j e^{-beta_s (t_i - t_j)}
        std::vector<double> a_plus(p, 0.0), a_minus(p, 0.0);
        double prev_t = 0.0;
        for (std::size_t i = 0; i < d.time.size(); ++i) {
            double dt = d.time[i] - prev_t;
            for (std::size_t s = 0; s < p; ++s) {
                double decay = std::exp(-spec.betas[s] * dt);
                a_plus[s] *= decay;
                a_minus[s] *= decay;
            }
            if (d.time[i] > t0) {
                const auto& a = d.side[i] > 0 ? a_plus : a_minus;
                double big_a = 0.0;
                for (std::size_t s = 0; s < p; ++s) big_a += spec.weights[s] * a[s];
                double kappa = spec.kappa_inf + big_a;
                if (kappa <= 0.0)
                    throw error("hawkes_loglik: vanishing intensity at a jump time");
                r.total += std::log(kappa);
                ++r.jumps;
                double inv = 1.0 / kappa;
                r.gradient(0) += inv;
                r.hessian(0, 0) -= inv * inv;
                for (std::size_t s = 0; s < p; ++s) {
                    r.gradient(1 + s) += a[s] * inv;
                    r.hessian(0, 1 + s) -= a[s] * inv * inv;
                    r.hessian(1 + s, 0) -= a[s] * inv * inv;
                    for (std::size_t u = 0; u <= s; ++u) {
                        double v = -a[s] * a[u] * inv * inv;
                        r.hessian(1 + s, 1 + u) += v;
                        if (u != s) r.hessian(1 + u, 1 + s) += v;
                    }
                }
            }
            for (std::size_t s = 0; s < p; ++s) {
                a_plus[s] += exc_plus[i];
                a_minus[s] += exc_minus[i];
            }
            prev_t = d.time[i];
        }

        // compensator: kappa_inf (T - t0) per side plus kernel antiderivatives
        r.total -= 2.0 * spec.kappa_inf * (t_end - t0);
        r.gradient(0) -= 2.0 * (t_end - t0);
        for (std::size_t j = 0; j < d.time.size(); ++j) {
            double exc_total = exc_plus[j] + exc_minus[j];
            for (std::size_t s = 0; s < p; ++s) {
                double beta = spec.betas[s];
                double tail;
                if (d.time[j] < t0)
                    tail = (std::exp(-beta * (t0 - d.time[j])) - std::exp(-beta * (t_end - d.time[j]))) / beta;
                else
                    tail = (1.0 - std::exp(-beta * (t_end - d.time[j]))) / beta;
                r.total -= spec.weights[s] * exc_total * tail;
                r.gradient(1 + s) -= exc_total * tail;
            }
        }
        r.total += 2.0 * t_end; // the + T convention of each side's likelihood
        return r;
    });

    LoglikResult out;
    out.gradient = Eigen::VectorXd::Zero(dim);
    out.hessian = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& r : parts) {
        out.total += r.total;
        out.jumps += r.jumps;
        out.gradient += r.gradient;
        out.hessian += r.hessian;
    }
    if (out.jumps == 0) throw error("hawkes_loglik: no events after the burn-in");
    out.per_point = out.total / static_cast<double>(out.jumps);
    return out;
}

inline LoglikResult hawkes_loglik(const std::vector<DayWindow>& windows, const HawkesSpec& spec,
                                  double t0, int threads = 1) {
    return hawkes_loglik(likelihood_days(windows, threads), spec, t0, threads);
}

// ---------------------------------------------------------------------------
// Excitation split and mark-type selection (mono kernel)
// ---------------------------------------------------------------------------

struct ExcitationSplit {
    double u = 0.5;    // self share of iota
    double u_s = 1.0;  // constant share of iota_s
    double u_c = 1.0;  // constant share of iota_c
    AffineExcitation phi_s;
    AffineExcitation phi_c;
    double per_point = 0.0;
};

namespace detail {

template <typename Fn>
double grid_maximize(Fn&& value, double lo, double hi, double coarse, double fine,
                     double* best_value = nullptr) {
    double best_x = lo;
    double best_v = -std::numeric_limits<double>::infinity();
    auto sweep = [&](double a, double b, double step) {
        for (double x = a; x <= b + 1e-12; x += step) {
            double xi = std::min(x, b);
            double v = value(xi);
            if (v > best_v) {
                best_v = v;
                best_x = xi;
            }
        }
    };
    sweep(lo, hi, coarse);
    sweep(std::max(lo, best_x - coarse), std::min(hi, best_x + coarse), fine);
    if (best_value) *best_value = best_v;
    return best_x;
}

} // namespace detail

/// Splits the GMM excitation budget into self/cross and constant/linear parts
/// by 1-D likelihood grid searches (step 0.01, refined at 0.001).
inline ExcitationSplit fit_excitation_split(const std::vector<LikelihoodDay>& days,
                                            const GmmEstimate& gmm, MarkType mark, double m1,
                                            double m_bar, const HawkesCalibConfig& cfg) {
    if (gmm.iota <= 0.0)
        throw error("fit_excitation_split: GMM excitation is zero, nothing to split");
    auto loglik_with = [&](const AffineExcitation& ps, const AffineExcitation& pc,
                           MarkType mt) {
        HawkesSpec s{gmm.kappa_inf, {gmm.beta}, {1.0}, ps, pc, mt, m1, m_bar};
        return hawkes_loglik(days, s, cfg.burn_in, cfg.threads).per_point;
    };

    ExcitationSplit out;
    // self/cross proportion on the unmarked (constant) model
    out.u = detail::grid_maximize(
        [&](double u) {
            return loglik_with({u * gmm.iota, 0.0}, {(1.0 - u) * gmm.iota, 0.0}, MarkType::unit);
        },
        0.0, 1.0, 0.01, 0.001);
    double iota_s = out.u * gmm.iota;
    double iota_c = (1.0 - out.u) * gmm.iota;

    if (mark == MarkType::unit) {
        out.u_s = out.u_c = 1.0;
        out.phi_s = {iota_s, 0.0};
        out.phi_c = {iota_c, 0.0};
        out.per_point = loglik_with(out.phi_s, out.phi_c, MarkType::unit);
        return out;
    }

    out.u_s = detail::grid_maximize(
        [&](double us) {
            return loglik_with({us * iota_s, (1.0 - us) * iota_s}, {iota_c, 0.0}, mark);
        },
        0.0, 1.0, 0.01, 0.001);
    out.phi_s = {out.u_s * iota_s, (1.0 - out.u_s) * iota_s};
    out.u_c = detail::grid_maximize(
        [&](double uc) {
            return loglik_with(out.phi_s, {uc * iota_c, (1.0 - uc) * iota_c}, mark);
        },
        0.0, 1.0, 0.01, 0.001);
    out.phi_c = {out.u_c * iota_c, (1.0 - out.u_c) * iota_c};
    out.per_point = loglik_with(out.phi_s, out.phi_c, mark);
    return out;
}

struct MarkSelection {
    MarkType best = MarkType::unit;
    bool tie = false;
    std::vector<std::pair<MarkType, double>> table; // per-point log-likelihoods
    ExcitationSplit split;                          // split for the winning type
};

/// Compares the per-point likelihood of the three mark variants; ties keep the
/// unit < volume < price order.
inline MarkSelection select_mark_type(const std::vector<LikelihoodDay>& days,
                                      const GmmEstimate& gmm, double m1, double m_bar,
                                      const HawkesCalibConfig& cfg) {
    MarkSelection sel;
    std::vector<ExcitationSplit> splits;
    for (MarkType mt : {MarkType::unit, MarkType::volume, MarkType::price}) {
        splits.push_back(fit_excitation_split(days, gmm, mt, m1, m_bar, cfg));
        sel.table.emplace_back(mt, splits.back().per_point);
    }
    // differences below the tolerance are ties (exact equality never survives
    // floating-point evaluation order); ties keep the earlier type
    const double tie_tol = 1e-9;
    std::size_t best = 0;
    for (std::size_t i = 1; i < splits.size(); ++i)
        if (sel.table[i].second > sel.table[best].second + tie_tol) best = i;
    for (std::size_t i = 0; i < splits.size(); ++i)
        if (i != best && std::abs(sel.table[i].second - sel.table[best].second) <= tie_tol)
            sel.tie = true;
    sel.best = sel.table[best].first;
    sel.split = splits[best];
    return sel;
}

// ---------------------------------------------------------------------------
// Multi-exponential kernel MLE
// ---------------------------------------------------------------------------

struct MleResult {
    HawkesSpec spec;
    double per_point = 0.0;
    double burn_in = 0.0;
    double br = 0.0;
    double dbr = 0.0;
};

namespace detail {

inline HawkesSpec multi_fit_spec(double kappa_inf, const std::vector<double>& betas,
                                 const std::vector<double>& weights,
                                 const AffineExcitation& phi_s_hat,
                                 const AffineExcitation& phi_c_hat, MarkType mark, double m1,
                                 double m_bar) {
    // weights are free during the fit; the spec form wants K(0) = 1, so the
    // excitation coefficients absorb the weight sum
    double wsum = sum(weights);
    std::vector<double> wn(weights);
    for (double& w : wn) w /= wsum;
    AffineExcitation ps{phi_s_hat.c0 * wsum, phi_s_hat.c1 * wsum};
    AffineExcitation pc{phi_c_hat.c0 * wsum, phi_c_hat.c1 * wsum};
    return HawkesSpec{kappa_inf, betas, wn, ps, pc, mark, m1, m_bar};
}

} // namespace detail

/// Newton MLE on (kappa_inf, w_1..w_4) at fixed excitation proportions,
/// pruning the most negative weight until all survive positive, then rescaling
/// so that K(0) = 1. The starting weights are uniform with the mono branching
/// ratio; the Hessian is shifted when not negative definite and steps are
/// halved while the likelihood decreases.
inline MleResult fit_multi_kernel(const std::vector<LikelihoodDay>& days, const GmmEstimate& gmm,
                                  const ExcitationSplit& split, MarkType mark, double m1,
                                  double m_bar, const HawkesCalibConfig& cfg) {
    double iota_mono = split.phi_s.mean() + split.phi_c.mean();
    if (mark == MarkType::unit) iota_mono = split.phi_s.c0 + split.phi_c.c0;
    if (iota_mono <= 0.0) throw error("fit_multi_kernel: zero excitation start");
    // normalized excitation: mean jump contribution 1 per event
    AffineExcitation phi_s_hat{split.phi_s.c0 / iota_mono, split.phi_s.c1 / iota_mono};
    AffineExcitation phi_c_hat{split.phi_c.c0 / iota_mono, split.phi_c.c1 / iota_mono};

    std::vector<double> betas = cfg.beta_grid;
    while (true) {
        std::size_t p = betas.size();
        double inv_norm = 0.0;
        for (double b : betas) inv_norm += (1.0 / static_cast<double>(p)) / b;
        double w0 = gmm.br_mono / inv_norm / static_cast<double>(p);

        Eigen::VectorXd x(1 + p);
        x(0) = gmm.kappa_inf;
        for (std::size_t s = 0; s < p; ++s) x(1 + s) = w0;

        auto eval = [&](const Eigen::VectorXd& v) {
            HawkesSpec spec{v(0),
                            betas,
                            std::vector<double>(v.data() + 1, v.data() + 1 + p),
                            phi_s_hat,
                            phi_c_hat,
                            mark,
                            m1,
                            m_bar};
            return hawkes_loglik(days, spec, cfg.burn_in, cfg.threads);
        };

        double value = 0.0;
        bool converged = false;
        for (int it = 0; it < cfg.newton.max_iterations; ++it) {
            LoglikResult cur = eval(x);
            value = cur.total;
            if (cur.gradient.norm() <= cfg.newton.gradient_tol * std::max(1.0, std::abs(value))) {
                converged = true;
                break;
            }
            Eigen::MatrixXd h = cur.hessian;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            double max_ev = es.eigenvalues().maxCoeff();
            if (max_ev >= 0.0) // shift to a negative definite surrogate
                h -= (max_ev + 1e-8 * std::max(1.0, std::abs(max_ev))) *
                     Eigen::MatrixXd::Identity(h.rows(), h.cols());
            Eigen::VectorXd step = h.ldlt().solve(cur.gradient);
            double scale = 1.0;
            int halvings = 0;
            while (true) {
                Eigen::VectorXd cand = x - scale * step;
                bool feasible = cand(0) > 0.0;
                if (feasible && eval(cand).total >= value) {
                    x = cand;
                    break;
                }
                scale *= 0.5;
                if (++halvings > cfg.newton.max_halvings)
                    throw error("fit_multi_kernel: Newton line search exhausted");
            }
        }
        if (!converged) throw error("fit_multi_kernel: Newton did not converge");

        int worst = -1;
        double worst_w = 0.0;
        for (std::size_t s = 0; s < p; ++s) {
            if (x(1 + s) <= 0.0 && (worst < 0 || x(1 + s) < worst_w)) {
                worst = static_cast<int>(s);
                worst_w = x(1 + s);
            }
        }
        if (worst >= 0) {
            betas.erase(betas.begin() + worst);
            if (betas.empty()) throw error("fit_multi_kernel: all kernel weights pruned");
            continue;
        }

        MleResult out;
        out.spec = detail::multi_fit_spec(x(0), betas,
                                          std::vector<double>(x.data() + 1, x.data() + 1 + p),
                                          phi_s_hat, phi_c_hat, mark, m1, m_bar);
        out.spec.validate();
        out.per_point = hawkes_loglik(days, out.spec, cfg.burn_in, cfg.threads).per_point;
        out.burn_in = cfg.burn_in;
        out.br = out.spec.branching_ratio();
        out.dbr = out.spec.directional_branching_ratio();
        return out;
    }
}

/// Mono-exponential model assembled from the GMM estimate and the winning split.
inline MleResult mono_result(const GmmEstimate& gmm, const ExcitationSplit& split, MarkType mark,
                             double m1, double m_bar, const HawkesCalibConfig& cfg) {
    MleResult out;
    out.spec = HawkesSpec{gmm.kappa_inf, {gmm.beta}, {1.0}, split.phi_s, split.phi_c,
                          mark, m1, m_bar};
    out.spec.validate();
    out.per_point = split.per_point;
    out.burn_in = cfg.burn_in;
    out.br = out.spec.branching_ratio();
    out.dbr = out.spec.directional_branching_ratio();
    return out;
}

} // namespace hawkes_impact
