#pragma once

#include "hawkes_impact/common.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace hawkes_impact {

enum class MarkType { unit, volume, price };

inline std::string to_string(MarkType m) {
    switch (m) {
        case MarkType::unit: return "unit";
        case MarkType::volume: return "volume";
        case MarkType::price: return "price";
    }
    return "?";
}

inline MarkType mark_type_from_string(const std::string& s) {
    if (s == "unit") return MarkType::unit;
    if (s == "volume") return MarkType::volume;
    if (s == "price") return MarkType::price;
    throw error("unknown mark type: " + s);
}

/// Affine excitation function phi(x) = c0 + c1 * x, x >= 0.
struct AffineExcitation {
    double c0 = 0.0;
    double c1 = 0.0;

    double operator()(double mark) const { return c0 + c1 * mark; }
    // Average excitation when E[mark] = 1 (marks are normalized by their mean).
    double mean() const { return c0 + c1; }
};

/// Parameters of the bivariate marked Hawkes order flow.
///
/// Intensity kernel K(u) = sum_i w_i exp(-beta_i u), normalized so K(0) = 1.
/// phi_s / phi_c are the self- and cross-excitation functions applied to the
/// event mark (1, |dV|/m1 or |dM|/m_bar depending on mark_type).
struct HawkesSpec {
    double kappa_inf = 0.0;            // baseline intensity per side (1/hour)
    std::vector<double> betas;         // decay speeds, strictly increasing (1/hour)
    std::vector<double> weights;       // kernel weights, sum to 1
    AffineExcitation phi_s;            // self-excitation (1/hour per unit mark)
    AffineExcitation phi_c;            // cross-excitation
    MarkType mark_type = MarkType::unit;
    double m1 = 1.0;                   // mean trade volume (shares)
    double m_bar = 1.0;                // mean absolute price jump (currency)

    std::size_t scales() const { return betas.size(); }

    double iota_s() const { return mark_type == MarkType::unit ? phi_s.c0 : phi_s.mean(); }
    double iota_c() const { return mark_type == MarkType::unit ? phi_c.c0 : phi_c.mean(); }
    double iota() const { return iota_s() + iota_c(); }

    double kernel_integral() const {
        double s = 0.0;
        for (std::size_t i = 0; i < betas.size(); ++i) s += weights[i] / betas[i];
        return s;
    }

    double branching_ratio() const { return iota() * kernel_integral(); }
    double directional_branching_ratio() const { return (iota_s() - iota_c()) * kernel_integral(); }

    bool stationary() const { return branching_ratio() < 1.0; }

    // Stationary mean intensity per side.
    double kappa_bar() const { return kappa_inf / (1.0 - branching_ratio()); }

    double kernel_value(double t) const {
        if (t < 0.0) throw error("kernel_value: negative time");
        double k = 0.0;
        for (std::size_t i = 0; i < betas.size(); ++i) k += weights[i] * std::exp(-betas[i] * t);
        return k;
    }

    // Antiderivative of K with kernel_antiderivative(0) = 0.
    double kernel_antiderivative(double t) const {
        double k = 0.0;
        for (std::size_t i = 0; i < betas.size(); ++i)
            k += weights[i] * (1.0 - std::exp(-betas[i] * t)) / betas[i];
        return k;
    }

    void validate() const {
        if (betas.empty() || betas.size() != weights.size())
            throw error("HawkesSpec: betas/weights must be nonempty and of equal size");
        for (std::size_t i = 0; i < betas.size(); ++i) {
            if (betas[i] <= 0.0) throw error("HawkesSpec: decay speeds must be positive");
            if (i > 0 && betas[i] <= betas[i - 1])
                throw error("HawkesSpec: decay speeds must be strictly increasing");
            if (weights[i] <= 0.0) throw error("HawkesSpec: kernel weights must be positive");
        }
        if (kappa_inf < 0.0) throw error("HawkesSpec: baseline intensity must be >= 0");
        if (phi_s.c0 < 0.0 || phi_s.c1 < 0.0 || phi_c.c0 < 0.0 || phi_c.c1 < 0.0)
            throw error("HawkesSpec: excitation coefficients must be >= 0");
        if (mark_type == MarkType::unit && (phi_s.c1 != 0.0 || phi_c.c1 != 0.0))
            throw error("HawkesSpec: unit marks require zero linear excitation terms");
        if (m1 <= 0.0 || m_bar <= 0.0) throw error("HawkesSpec: m1 and m_bar must be positive");
        if (!stationary())
            throw error("HawkesSpec: non-stationary parameters, branching ratio = " +
                        std::to_string(branching_ratio()));
    }

    /// Builds a validated spec; weights are rescaled to sum to one.
    static HawkesSpec make(double kappa_inf, std::vector<double> betas, std::vector<double> weights,
                           AffineExcitation phi_s, AffineExcitation phi_c, MarkType mark_type,
                           double m1 = 1.0, double m_bar = 1.0) {
        double w_sum = sum(weights);
        if (w_sum <= 0.0) throw error("HawkesSpec: kernel weights must have positive sum");
        for (double& w : weights) w /= w_sum;
        HawkesSpec s{kappa_inf, std::move(betas), std::move(weights), phi_s, phi_c, mark_type, m1, m_bar};
        s.validate();
        return s;
    }
};

/// Parameters of the price propagator G and its resilience R.
///
/// R(t) = gamma * [1 - sum_i lambda_i (1 - exp(-rho_i t))], nu = 1 - sum lambda_i.
/// G ramps linearly from 1 at t=0 to R(adj_lag), then follows R.
struct PropagatorSpec {
    double gamma = 1.0;                // amplification factor
    double nu = 1.0;                   // permanent-impact fraction
    std::vector<double> lambdas;       // transient weights, nu + sum lambda_i = 1
    std::vector<double> rhos;          // decay speeds (1/hour)
    double adj_lag = 0.0;              // adjustment lag (hours)
    double sigma = 0.0;                // Brownian noise volatility (currency / sqrt hour)
    double q = 1.0;                    // liquidity (shares per currency unit of impact)

    std::size_t scales() const { return rhos.size(); }

    double resilience(double t) const {
        if (t < 0.0) throw error("resilience: negative time");
        double r = 1.0;
        for (std::size_t i = 0; i < rhos.size(); ++i)
            r -= lambdas[i] * (1.0 - std::exp(-rhos[i] * t));
        return gamma * r;
    }

    double value(double t) const {
        if (t < 0.0) throw error("propagator value: negative time");
        if (t <= adj_lag && adj_lag > 0.0)
            return 1.0 + (resilience(adj_lag) - 1.0) * t / adj_lag;
        return resilience(t);
    }

    double value_at_infinity() const { return gamma * nu; }

    void validate() const {
        if (lambdas.size() != rhos.size()) throw error("PropagatorSpec: lambdas/rhos size mismatch");
        double lam_sum = 0.0;
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            if (rhos[i] <= 0.0) throw error("PropagatorSpec: decay speeds must be positive");
            if (lambdas[i] < 0.0 || lambdas[i] > 1.0)
                throw error("PropagatorSpec: transient weights must lie in [0,1]");
            lam_sum += lambdas[i];
        }
        if (std::abs(nu + lam_sum - 1.0) > 1e-12)
            throw error("PropagatorSpec: nu + sum lambda_i must equal 1");
        if (gamma <= 0.0) throw error("PropagatorSpec: gamma must be positive");
        if (adj_lag < 0.0 || sigma < 0.0) throw error("PropagatorSpec: adj_lag and sigma must be >= 0");
        if (q <= 0.0) throw error("PropagatorSpec: q must be positive");
    }

    /// Builds a validated spec with nu derived from the transient weights.
    static PropagatorSpec make(double gamma, std::vector<double> lambdas, std::vector<double> rhos,
                               double adj_lag = 0.0, double sigma = 0.0, double q = 1.0) {
        double nu = 1.0 - sum(lambdas);
        PropagatorSpec p{gamma, nu, std::move(lambdas), std::move(rhos), adj_lag, sigma, q};
        p.validate();
        return p;
    }
};

} // namespace hawkes_impact
