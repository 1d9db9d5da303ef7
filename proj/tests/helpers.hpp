#pragma once

#include "hawkes_impact/simulate.hpp"

#include <random>
#include <vector>

namespace hawkes_impact::testing {

inline HawkesSpec sim1_hawkes() {
    return HawkesSpec::make(15.0, {60.0, 360.0}, {0.100, 0.900}, {110.5, 19.5}, {66.5, 3.5},
                            MarkType::volume, 776.0, 0.0025);
}

inline PropagatorSpec sim1_propagator() {
    return PropagatorSpec::make(2.70, {0.50, 0.10}, {60.0, 360.0}, 4.0 / 3600.0, 0.10,
                                776.0 / 0.00375);
}

inline HawkesSpec sim2_hawkes() {
    return HawkesSpec::make(40.0, {120.0, 360.0}, {0.050, 0.950}, {84.0, 36.0}, {45.0, 5.0},
                            MarkType::volume, 978.0, 0.0025);
}

inline PropagatorSpec sim2_propagator() {
    return PropagatorSpec::make(3.20, {0.70}, {130.0}, 2.0 / 3600.0, 0.0, 978.0 / 0.00375);
}

/// Simulated day windows; tick 0 keeps the price path exact.
inline std::vector<DayWindow> simulate_windows(const HawkesSpec& hawkes,
                                               const PropagatorSpec& prop, int n_windows,
                                               std::uint64_t seed, double tick = 0.005,
                                               double horizon = 2.0,
                                               double quote_rate_multiple = 10.0) {
    std::vector<DayWindow> windows(static_cast<std::size_t>(n_windows));
    for (int i = 0; i < n_windows; ++i) {
        std::uint64_t s = seed + 1315423911ull * static_cast<std::uint64_t>(i + 1);
        auto trades = simulate_flow(hawkes, exponential_volumes(hawkes.m1), horizon, s);
        PriceSimConfig cfg;
        cfg.quote_rate = quote_rate_multiple * 2.0 * hawkes.kappa_bar();
        cfg.tick_size = tick;
        cfg.base_mid = 32.0;
        windows[static_cast<std::size_t>(i)] =
            simulate_price(trades, prop, stepped_jumps(tick > 0.0 ? tick : 0.005, hawkes.m1),
                           horizon, s, cfg);
        windows[static_cast<std::size_t>(i)].label = "w" + std::to_string(i);
    }
    return windows;
}

/// Windows with quotes on a uniform 1-second grid that realize the propagator
/// target exactly and trades strictly between grid points. The lagged price at
/// theta - reg_window then sits on a grid quote, so the windowed regression
/// model holds up to the (negligible for fast kernels) old-trade decay.
template <typename Gfn>
std::vector<DayWindow> dense_grid_windows(const Gfn& g, int n_windows, std::uint64_t seed,
                                          double trade_rate = 150.0, double horizon = 2.0,
                                          double trade_band_end = 0.8,
                                          double quote_end = 1.04) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double step = 1.0 / 3600.0;
    std::vector<DayWindow> windows;
    for (int wi = 0; wi < n_windows; ++wi) {
        DayWindow day;
        day.horizon = horizon;
        day.tick_size = 0.0;
        struct Trade {
            double time;
            double jump;
        };
        std::vector<Trade> trades;
        double t = 0.55;
        while (true) {
            t += -std::log(1.0 - unif(rng)) / trade_rate;
            if (t > trade_band_end) break;
            double jump = (unif(rng) < 0.5 ? -1.0 : 1.0) * 0.0025 * (1.0 + (unif(rng) < 0.2));
            trades.push_back({t, jump});
        }
        double prefix = 0.0;
        std::size_t next_trade = 0;
        auto target_at = [&](double time) {
            double v = 0.0;
            for (const auto& tr : trades) {
                if (tr.time > time) break;
                v += tr.jump * g(time - tr.time);
            }
            return v;
        };
        for (double grid = step; grid < quote_end; grid += step) {
            while (next_trade < trades.size() && trades[next_trade].time <= grid) {
                MarkedEvent e;
                e.time = trades[next_trade].time;
                e.kind = EventKind::trade;
                e.price_jump = trades[next_trade].jump;
                e.side = e.price_jump > 0.0 ? +1 : -1;
                e.volume = 500.0;
                day.events.push_back(e);
                prefix += e.price_jump;
                ++next_trade;
            }
            double jump = target_at(grid) - prefix;
            if (jump == 0.0) continue;
            MarkedEvent e;
            e.time = grid;
            e.kind = EventKind::quote;
            e.price_jump = jump;
            e.side = jump > 0.0 ? +1 : -1;
            day.events.push_back(e);
            prefix += jump;
        }
        day.validate();
        windows.push_back(std::move(day));
    }
    return windows;
}

} // namespace hawkes_impact::testing
