#pragma once

#include "hawkes_impact/events.hpp"
#include "hawkes_impact/specs.hpp"

#include <vector>

namespace hawkes_impact {

/// Mark attached to a trade, normalized so the mean mark is 1.
inline double mark_of(const HawkesSpec& spec, const MarkedEvent& e) {
    switch (spec.mark_type) {
        case MarkType::unit: return 1.0;
        case MarkType::volume: return e.volume / spec.m1;
        case MarkType::price: return std::abs(e.price_jump) / spec.m_bar;
    }
    return 1.0;
}

/// Per-scale intensity components, evolved event by event.
/// kappa_plus[i] relaxes toward kappa_inf / p at speed beta_i between events
/// and jumps by w_i * phi(mark) at trades.
struct IntensityState {
    std::vector<double> kappa_plus;
    std::vector<double> kappa_minus;
    double last_time = 0.0;

    double total_plus() const { return sum(kappa_plus); }
    double total_minus() const { return sum(kappa_minus); }

    std::vector<double> imbalances() const {
        std::vector<double> d(kappa_plus.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = kappa_plus[i] - kappa_minus[i];
        return d;
    }
};

/// State with all components at the baseline split kappa_inf / p.
inline IntensityState baseline_state(const HawkesSpec& spec) {
    std::size_t p = spec.scales();
    IntensityState st;
    st.kappa_plus.assign(p, spec.kappa_inf / static_cast<double>(p));
    st.kappa_minus = st.kappa_plus;
    return st;
}

/// State at the stationary mean, split across scales proportionally to w_i / beta_i.
inline IntensityState stationary_state(const HawkesSpec& spec) {
    std::size_t p = spec.scales();
    double norm = spec.kernel_integral();
    double kb = spec.kappa_bar();
    IntensityState st;
    st.kappa_plus.resize(p);
    for (std::size_t i = 0; i < p; ++i)
        st.kappa_plus[i] = kb * (spec.weights[i] / spec.betas[i]) / norm;
    st.kappa_minus = st.kappa_plus;
    return st;
}

inline IntensityState decay_intensity(IntensityState state, const HawkesSpec& spec, double t) {
    if (t < state.last_time) throw error("decay_intensity: time runs backwards");
    double target = spec.kappa_inf / static_cast<double>(spec.scales());
    double dt = t - state.last_time;
    for (std::size_t i = 0; i < spec.scales(); ++i) {
        double decay = std::exp(-spec.betas[i] * dt);
        state.kappa_plus[i] = target + (state.kappa_plus[i] - target) * decay;
        state.kappa_minus[i] = target + (state.kappa_minus[i] - target) * decay;
    }
    state.last_time = t;
    return state;
}

/// Applies the excitation jump of a trade; the state must already be decayed
/// to the event time.
inline IntensityState apply_trade(IntensityState state, const HawkesSpec& spec,
                                  const MarkedEvent& event) {
    if (!event.is_trade()) throw error("apply_trade: quote events carry no excitation");
    double x = mark_of(spec, event);
    double self = spec.phi_s(x);
    double cross = spec.phi_c(x);
    for (std::size_t i = 0; i < spec.scales(); ++i) {
        double ws = spec.weights[i] * self;
        double wc = spec.weights[i] * cross;
        if (event.side > 0) {
            state.kappa_plus[i] += ws;
            state.kappa_minus[i] += wc;
        } else {
            state.kappa_minus[i] += ws;
            state.kappa_plus[i] += wc;
        }
    }
    return state;
}

/// Intensities at time t obtained by replaying the trade events before t,
/// starting from the baseline split at time 0 (no pre-window history).
inline IntensityState replay_intensity(const HawkesSpec& spec,
                                       const std::vector<MarkedEvent>& events, double t) {
    IntensityState st = baseline_state(spec);
    for (const auto& e : events) {
        if (e.time >= t) break;
        if (!e.is_trade()) continue;
        st = apply_trade(decay_intensity(std::move(st), spec, e.time), spec, e);
    }
    return decay_intensity(std::move(st), spec, t);
}

} // namespace hawkes_impact
