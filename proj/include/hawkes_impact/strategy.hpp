#pragma once

#include "hawkes_impact/intensity.hpp"
#include "hawkes_impact/specs.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hawkes_impact {

// ---------------------------------------------------------------------------
// Matrix functions zeta(M) = sum (-M)^k / (k+1)!, omega(M) = sum (-M)^k / (k+2)!
// ---------------------------------------------------------------------------

namespace detail {

struct ZetaOmega {
    Eigen::MatrixXd zeta;
    Eigen::MatrixXd omega;
    Eigen::MatrixXd exp_neg; // exp(-M), a free by-product
};

// Truncated series at small norm, then doublings through the entire-function
// identities zeta(2A) = zeta(A)(I + e^{-A})/2 and omega(2A) = (2 omega(A) + zeta(A)^2)/4.
inline ZetaOmega zeta_omega_pair(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw error("zeta/omega: square matrix required");
    Eigen::Index n = m.rows();
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

    double norm = m.norm();
    int squarings = 0;
    while (norm > 0.5 && squarings < 64) {
        norm *= 0.5;
        ++squarings;
    }
    Eigen::MatrixXd a = m / std::pow(2.0, squarings);

    ZetaOmega r{id, id / 2.0, id};
    Eigen::MatrixXd term = id; // (-A)^k / k!
    double scale_z = 1.0, scale_w = 0.5;
    for (int k = 1; k < 200; ++k) {
        term = term * (-a) / static_cast<double>(k);
        r.exp_neg += term;
        scale_z = 1.0 / static_cast<double>(k + 1);
        scale_w = 1.0 / (static_cast<double>(k + 1) * static_cast<double>(k + 2));
        Eigen::MatrixXd tz = term * scale_z;       // (-A)^k / (k+1)!
        Eigen::MatrixXd tw = term * scale_w;       // (-A)^k / (k+2)!
        r.zeta += tz;
        r.omega += tw;
        if (term.norm() <= 1e-16 * std::max(1.0, r.zeta.norm())) break;
    }
    for (int s = 0; s < squarings; ++s) {
        Eigen::MatrixXd z2 = 0.5 * r.zeta * (id + r.exp_neg);
        Eigen::MatrixXd w2 = 0.25 * (2.0 * r.omega + r.zeta * r.zeta);
        r.exp_neg = r.exp_neg * r.exp_neg;
        r.zeta = std::move(z2);
        r.omega = std::move(w2);
    }
    return r;
}

} // namespace detail

inline Eigen::MatrixXd zeta(const Eigen::MatrixXd& m) { return detail::zeta_omega_pair(m).zeta; }
inline Eigen::MatrixXd omega(const Eigen::MatrixXd& m) { return detail::zeta_omega_pair(m).omega; }

// ---------------------------------------------------------------------------
// Optimal execution strategy
// ---------------------------------------------------------------------------

/// Inputs of the closed-form strategy: a mono-exponential propagator and a
/// multi-exponential intensity kernel.
struct StrategyParams {
    double rho = 0.0;            // propagator speed (1/hour)
    double nu = 0.0;             // permanent-impact fraction
    double eps = 0.0;            // the position-formula prefactor, defaults to nu
    double q = 1.0;              // liquidity (shares per currency)
    double m1 = 1.0;             // mean trade volume (shares)
    std::vector<double> betas;   // intensity decay speeds
    std::vector<double> weights; // kernel weights
    std::vector<double> alphas;  // alpha_i = w_i (iota_s - iota_c)
    Eigen::MatrixXd H;           // H_ij = 1{i=j} beta_i - alpha_j

    std::size_t scales() const { return betas.size(); }

    static StrategyParams make(const HawkesSpec& hawkes, const PropagatorSpec& prop) {
        if (prop.scales() != 1)
            throw error("StrategyParams: the closed form needs a mono-exponential propagator");
        StrategyParams p;
        p.rho = prop.rhos[0];
        p.nu = prop.nu;
        p.eps = prop.nu;
        p.q = prop.q;
        p.m1 = hawkes.m1;
        p.betas = hawkes.betas;
        p.weights = hawkes.weights;
        double excess = hawkes.iota_s() - hawkes.iota_c();
        std::size_t n = hawkes.scales();
        p.alphas.resize(n);
        p.H.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) p.alphas[j] = hawkes.weights[j] * excess;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                p.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    (i == j ? hawkes.betas[i] : 0.0) - p.alphas[j];
        return p;
    }
};

/// Trading state observed at time t.
struct ExecutionState {
    double position = 0.0;        // X_t (shares)
    double transient = 0.0;       // D_t (currency)
    std::vector<double> deltas;   // intensity imbalances per scale (1/hour)
    double t = 0.0;
    double horizon = 0.0;         // T
};

namespace detail {

// k(u) = m1/(2 rho) {I + rho u / (2 + rho u) [zeta(uH) + nu rho u omega(uH)]} . 1
inline Eigen::VectorXd trend_vector(const StrategyParams& p, double u) {
    auto zw = zeta_omega_pair(u * p.H);
    Eigen::Index n = p.H.rows();
    Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(n, n) +
                            p.rho * u / (2.0 + p.rho * u) *
                                (zw.zeta + p.nu * p.rho * u * zw.omega);
    return p.m1 / (2.0 * p.rho) * (inner * Eigen::VectorXd::Ones(n));
}

inline double trend_term(const StrategyParams& p, const std::vector<double>& deltas, double u) {
    if (deltas.size() != p.scales()) throw error("strategy: imbalance dimension mismatch");
    Eigen::VectorXd k = trend_vector(p, u);
    double acc = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        acc += k(static_cast<Eigen::Index>(i)) * deltas[i];
    return acc;
}

} // namespace detail

/// Position the optimal strategy holds at time t:
/// (1 - eps) X* = -[1 + rho(T-t)] D + [2 + rho(T-t)] k(T-t) . delta.
inline double optimal_position(const StrategyParams& p, const ExecutionState& st) {
    if (st.t >= st.horizon) throw error("optimal_position: t past the horizon");
    double u = st.horizon - st.t;
    double rhs = -(1.0 + p.rho * u) * st.transient +
                 (2.0 + p.rho * u) * detail::trend_term(p, st.deltas, u);
    return rhs / (1.0 - p.eps);
}

/// Block trade executed at a grid time with deviation scaling s in [0,1]:
/// xi = -([1 + rho u] q s D + X) / (2 + rho u) + k(u) . (s delta).
inline double optimal_trade(const StrategyParams& p, const ExecutionState& st, double s) {
    if (st.t >= st.horizon) throw error("optimal_trade: t past the horizon");
    if (s < 0.0 || s > 1.0) throw error("optimal_trade: scale outside [0,1]");
    double u = st.horizon - st.t;
    double xi = -((1.0 + p.rho * u) * p.q * s * st.transient + st.position) / (2.0 + p.rho * u);
    if (s > 0.0) {
        std::vector<double> scaled(st.deltas);
        for (double& d : scaled) d *= s;
        xi += detail::trend_term(p, scaled, u);
    }
    return xi;
}

/// Mean-reversion-only benchmark: the trend term is dropped.
inline double poisson_trade(const StrategyParams& p, const ExecutionState& st, double s) {
    if (st.t >= st.horizon) throw error("poisson_trade: t past the horizon");
    double u = st.horizon - st.t;
    return -((1.0 + p.rho * u) * p.q * s * st.transient + st.position) / (2.0 + p.rho * u);
}

/// Instantaneous cost rate of not trading:
/// dA/dt = rho / (1 - eps) [ j(u)(D - (1-eps)X) - D + k(u) . delta ]^2, j(u) = 1/(2 + rho u).
inline double nontrading_cost(const StrategyParams& p, const ExecutionState& st) {
    if (st.t >= st.horizon) throw error("nontrading_cost: t past the horizon");
    double u = st.horizon - st.t;
    double j = 1.0 / (2.0 + p.rho * u);
    double inner = j * (st.transient - (1.0 - p.eps) * st.position) - st.transient +
                   detail::trend_term(p, st.deltas, u);
    return p.rho / (1.0 - p.eps) * inner * inner;
}

// ---------------------------------------------------------------------------
// Martingale / PMS diagnostics
// ---------------------------------------------------------------------------

struct PmsReport {
    std::vector<double> speed_grid;        // merged kernel speeds
    std::vector<double> kernel_residuals;  // (iota_s - iota_c) w_i - lambda_i rho_i
    std::vector<double> initial_residuals; // (m1/q)(k+_0i - k-_0i) - rho_i D_0i
    double excitation_constant_gap = 0.0;  // phi_s^0 - phi_c^0
    double excitation_residual_sup = 0.0;  // sup |phi_s - phi_c - (iota_s - iota_c) x| on the support
    double br = 0.0;
    double dbr = 0.0;
    double transient_fraction = 0.0;       // 1 - nu
    std::string classification;            // martingale | mean-reverting | persistent
};

/// Checks the no-manipulation conditions: per-speed kernel residuals, initial
/// state residuals, affine-linearity of phi_s - phi_c, and DBR vs 1 - nu.
/// Speed grids are merged with zero-padded weights when they differ.
inline PmsReport check_pms(const HawkesSpec& hawkes, const PropagatorSpec& prop,
                           const IntensityState& initial_state,
                           const std::vector<double>& initial_transients = {},
                           double tol = 1e-9) {
    PmsReport rep;
    // merge speed grids
    std::vector<double> grid;
    for (double b : hawkes.betas) grid.push_back(b);
    for (double r : prop.rhos)
        if (std::none_of(grid.begin(), grid.end(),
                         [&](double g) { return approx_equal(g, r, 1e-9, 1e-12); }))
            grid.push_back(r);
    std::sort(grid.begin(), grid.end());
    rep.speed_grid = grid;

    auto weight_at = [&](const std::vector<double>& speeds, const std::vector<double>& vals,
                         double speed) {
        for (std::size_t i = 0; i < speeds.size(); ++i)
            if (approx_equal(speeds[i], speed, 1e-9, 1e-12)) return vals[i];
        return 0.0;
    };

    double excess = hawkes.iota_s() - hawkes.iota_c();
    for (double speed : grid) {
        double w = weight_at(hawkes.betas, hawkes.weights, speed);
        double lam = weight_at(prop.rhos, prop.lambdas, speed);
        rep.kernel_residuals.push_back(excess * w - lam * speed);
    }

    // initial-state residuals on the merged grid; initial_transients is the
    // per-scale decomposition of D_0 indexed like prop.rhos
    for (double speed : grid) {
        double imbalance = 0.0;
        for (std::size_t i = 0; i < hawkes.scales(); ++i)
            if (approx_equal(hawkes.betas[i], speed, 1e-9, 1e-12))
                imbalance += initial_state.kappa_plus[i] - initial_state.kappa_minus[i];
        double d0 = 0.0;
        for (std::size_t i = 0; i < prop.scales() && i < initial_transients.size(); ++i)
            if (approx_equal(prop.rhos[i], speed, 1e-9, 1e-12)) d0 += initial_transients[i];
        rep.initial_residuals.push_back(hawkes.m1 / prop.q * imbalance - speed * d0);
    }

    rep.excitation_constant_gap = hawkes.phi_s.c0 - hawkes.phi_c.c0;
    if (hawkes.mark_type == MarkType::unit) {
        // support is the single point x = 1, where the affine condition is exact
        rep.excitation_residual_sup = 0.0;
    } else {
        double sup = 0.0;
        for (double x = 0.0; x <= 4.0; x += 0.25) {
            double r = hawkes.phi_s(x) - hawkes.phi_c(x) - excess * x;
            sup = std::max(sup, std::abs(r));
        }
        rep.excitation_residual_sup = sup;
    }

    rep.br = hawkes.branching_ratio();
    rep.dbr = hawkes.directional_branching_ratio();
    rep.transient_fraction = 1.0 - prop.nu;
    double gap = rep.dbr - rep.transient_fraction;
    if (std::abs(gap) <= tol)
        rep.classification = "martingale";
    else
        rep.classification = gap < 0.0 ? "mean-reverting" : "persistent";
    return rep;
}

} // namespace hawkes_impact
