#pragma once

#include "hawkes_impact/specs.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hawkes_impact {

/// Autocovariance of the total trade flow: cov(tau) = sum_j a_j exp(-b_j |tau|).
struct AutocovParams {
    std::vector<double> a;   // amplitudes, all positive
    std::vector<double> b;   // decay rates, interlacing 0 < b_1 < beta_1 < ... < b_p < beta_p
    double kappa_bar = 0.0;  // stationary mean intensity per side

    double operator()(double tau) const {
        double c = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) c += a[j] * std::exp(-b[j] * std::abs(tau));
        return c;
    }
};

namespace detail {

// P(X) = prod_i (beta_i - X) - iota * sum_i w_i prod_{k != i} (beta_k - X)
inline double autocov_poly(const HawkesSpec& s, double x) {
    double prod = 1.0;
    for (double beta : s.betas) prod *= beta - x;
    double corr = 0.0;
    for (std::size_t i = 0; i < s.betas.size(); ++i) {
        double partial = 1.0;
        for (std::size_t k = 0; k < s.betas.size(); ++k)
            if (k != i) partial *= s.betas[k] - x;
        corr += s.weights[i] * partial;
    }
    return prod - s.iota() * corr;
}

inline double bisect(const HawkesSpec& s, double lo, double hi) {
    double flo = autocov_poly(s, lo);
    double fhi = autocov_poly(s, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw error("autocov_params: root bracketing failed");
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        double fm = autocov_poly(s, mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Decay rates and amplitudes of the stationary flow autocovariance.
/// The b_j are the roots of P bracketed by (0, beta_1), (beta_1, beta_2), ...;
/// the amplitudes solve the Cauchy system B (a .* b) = kappa_bar * 1 with
/// B_ij = 1 / (beta_i^2 - b_j^2).
inline AutocovParams autocov_params(const HawkesSpec& spec) {
    if (!spec.stationary()) throw error("autocov_params: non-stationary spec");
    std::size_t p = spec.scales();

    AutocovParams out;
    out.kappa_bar = spec.kappa_bar();
    out.b.resize(p);
    const double eps = 1e-14;
    for (std::size_t j = 0; j < p; ++j) {
        double lo = (j == 0) ? 0.0 : spec.betas[j - 1] * (1.0 + eps);
        double hi = spec.betas[j] * (1.0 - eps);
        out.b[j] = detail::bisect(spec, lo, hi);
    }

    Eigen::MatrixXd B(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            B(i, j) = 1.0 / (spec.betas[i] * spec.betas[i] - out.b[j] * out.b[j]);
    Eigen::VectorXd ab = B.fullPivLu().solve(Eigen::VectorXd::Ones(p) * out.kappa_bar);

    out.a.resize(p);
    for (std::size_t j = 0; j < p; ++j) out.a[j] = ab(j) / out.b[j];
    return out;
}

/// Closed-form mono-exponential autocovariance:
/// cov(tau) = iota (2 beta - iota) / (2 beta) * 2 kappa_inf / (1 - iota/beta)^2 * exp(-(beta-iota)|tau|).
inline AutocovParams autocov_mono_closed_form(const HawkesSpec& spec) {
    if (spec.scales() != 1) throw error("autocov_mono_closed_form: needs a single scale");
    double beta = spec.betas[0];
    double iota = spec.iota();
    AutocovParams out;
    out.kappa_bar = spec.kappa_bar();
    out.b = {beta - iota};
    out.a = {iota * (2.0 * beta - iota) / (2.0 * beta) * 2.0 * spec.kappa_inf /
             ((1.0 - iota / beta) * (1.0 - iota / beta))};
    return out;
}

} // namespace hawkes_impact
