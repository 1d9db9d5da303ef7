#pragma once

#include "hawkes_impact/impact_state.hpp"
#include "hawkes_impact/intensity.hpp"

#include <functional>
#include <random>

namespace hawkes_impact {

using VolumeLaw = std::function<double(std::mt19937_64&)>;
/// Maps an executed volume to the magnitude of the midprice jump it triggers.
using PriceJumpLaw = std::function<double(double volume)>;

inline VolumeLaw exponential_volumes(double mean, double min_shares = 1.0) {
    return [mean, min_shares](std::mt19937_64& rng) {
        std::exponential_distribution<double> law(1.0 / mean);
        return std::max(min_shares, std::round(law(rng)));
    };
}

/// Jumps of one half-tick, two for volumes above the threshold multiple of m1.
inline PriceJumpLaw stepped_jumps(double tick, double m1, double threshold = 1.5) {
    double half = tick / 2.0;
    return [half, m1, threshold](double v) { return v > threshold * m1 ? 2.0 * half : half; };
}

/// Linear impact |dM| = v * m_bar / m1 (used by the martingale construction).
inline PriceJumpLaw linear_jumps(double m_bar, double m1) {
    return [m_bar, m1](double v) { return v * m_bar / m1; };
}

/// Simulates the marked bivariate order flow by exact thinning.
///
/// Between events every component relaxes monotonically toward kappa_inf / p,
/// so max(component, target) summed over components bounds the total intensity
/// on any interval with no event. Candidate points from that bound are accepted
/// with probability total/bound and assigned buy/sell by kappa+ / (kappa+ + kappa-).
/// Intensities start at the stationary mean split proportionally to w_i / beta_i.
///
/// Trades carry volumes drawn i.i.d. from volume_law; price jumps are filled in
/// by simulate_price except for price-marked specs, which need them immediately
/// (jump_law is then mandatory).
inline std::vector<MarkedEvent> simulate_flow(const HawkesSpec& spec, const VolumeLaw& volume_law,
                                              double horizon, std::uint64_t seed,
                                              const PriceJumpLaw& jump_law = nullptr) {
    spec.validate();
    if (horizon < 0.0) throw error("simulate_flow: negative horizon");
    if (spec.mark_type == MarkType::price && !jump_law)
        throw error("simulate_flow: price marks require a price jump law");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    IntensityState st = stationary_state(spec);
    double target = spec.kappa_inf / static_cast<double>(spec.scales());
    std::vector<MarkedEvent> events;
    double t = 0.0;
    while (true) {
        double bound = 0.0;
        for (double k : st.kappa_plus) bound += std::max(k, target);
        for (double k : st.kappa_minus) bound += std::max(k, target);
        if (bound <= 0.0) break;

        t += -std::log(1.0 - unif(rng)) / bound;
        if (t >= horizon) break;

        st = decay_intensity(std::move(st), spec, t);
        double kp = st.total_plus();
        double km = st.total_minus();
        if (unif(rng) * bound > kp + km) continue; // thinned out

        MarkedEvent e;
        e.time = t;
        e.kind = EventKind::trade;
        e.side = unif(rng) * (kp + km) < kp ? +1 : -1;
        e.volume = volume_law(rng);
        if (jump_law) e.price_jump = static_cast<double>(e.side) * jump_law(e.volume);
        st = apply_trade(std::move(st), spec, e);
        events.push_back(e);
    }
    return events;
}

/// Quote-grid construction for the price path.
struct PriceSimConfig {
    double quote_rate = 0.0;  // Poisson rate of quote-event candidates (1/hour)
    double tick_size = 0.0;   // half-tick quantization grid; 0 disables quantization
    double base_mid = 0.0;    // midprice level at window start
};

namespace detail {

inline double quantize_jump(double x, double tick) {
    if (tick <= 0.0) return x;
    return std::round(x / (tick / 2.0)) * (tick / 2.0);
}

} // namespace detail

/// Builds the full event sequence (trades + quotes) realizing the propagator price.
///
/// Trades keep their immediate jump dM (drawn from jump_law when absent). Quote
/// events are emitted on a Poisson grid so that the midprice tracks
/// sum dM_tau G(t - tau) + sigma W_t; each quote jump realizes the gap between
/// the current mid and that target, quantized to half-ticks when on a tick grid.
/// Event times are snapped to distinct milliseconds when tick_size > 0 so that a
/// serialized window round-trips exactly through the tick format.
inline DayWindow simulate_price(std::vector<MarkedEvent> trades, const PropagatorSpec& prop,
                                const PriceJumpLaw& jump_law, double horizon, std::uint64_t seed,
                                const PriceSimConfig& cfg) {
    prop.validate();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (auto& tr : trades) {
        if (!tr.is_trade()) throw error("simulate_price: expected trades only");
        if (tr.price_jump == 0.0)
            tr.price_jump = static_cast<double>(tr.side) * jump_law(tr.volume);
        tr.price_jump = detail::quantize_jump(tr.price_jump, cfg.tick_size);
        if (tr.price_jump == 0.0) tr.price_jump = static_cast<double>(tr.side) * cfg.tick_size / 2.0;
    }

    // Quote candidate times.
    std::vector<double> quote_times;
    if (cfg.quote_rate > 0.0) {
        double t = 0.0;
        while (true) {
            t += -std::log(1.0 - unif(rng)) / cfg.quote_rate;
            if (t >= horizon) break;
            quote_times.push_back(t);
        }
    }

    DayWindow w;
    w.horizon = horizon;
    w.tick_size = cfg.tick_size;
    w.base_mid = cfg.base_mid;

    std::size_t it = 0, iq = 0;
    double mid_offset = 0.0; // mid relative to base
    double wiener = 0.0;
    double last_time = 0.0;
    PropagatorFlow impact(prop);

    while (it < trades.size() || iq < quote_times.size()) {
        bool take_trade = it < trades.size() &&
                          (iq >= quote_times.size() || trades[it].time <= quote_times[iq]);
        double t = take_trade ? trades[it].time : quote_times[iq];
        wiener += gauss(rng) * std::sqrt(std::max(0.0, t - last_time));
        last_time = t;
        if (take_trade) {
            MarkedEvent e = trades[it++];
            mid_offset += e.price_jump;
            impact.add_trade(e.time, e.price_jump);
            w.events.push_back(e);
        } else {
            ++iq;
            impact.advance(t);
            double target = impact.propagated() + prop.sigma * wiener;
            double jump = detail::quantize_jump(target - mid_offset, cfg.tick_size);
            if (jump == 0.0) continue;
            MarkedEvent e;
            e.time = t;
            e.kind = EventKind::quote;
            e.price_jump = jump;
            e.side = jump > 0.0 ? +1 : -1;
            mid_offset += jump;
            w.events.push_back(e);
        }
    }

    // Snap to distinct milliseconds so the tick-file serialization is lossless.
    if (cfg.tick_size > 0.0) {
        long long prev_ms = 0;
        for (auto& e : w.events) {
            long long ms = std::max(prev_ms + 1, ms_from_hours(e.time));
            e.time = hours_from_ms(ms);
            prev_ms = ms;
        }
        while (!w.events.empty() && w.events.back().time >= horizon) w.events.pop_back();
    }
    w.validate();
    return w;
}

} // namespace hawkes_impact
