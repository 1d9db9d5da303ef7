#pragma once

#include "hawkes_impact/impact_state.hpp"
#include "hawkes_impact/parallel.hpp"
#include "hawkes_impact/strategy.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace hawkes_impact {

enum class StrategyKind { hawkes_mono, hawkes_multi, poisson };

inline std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::hawkes_mono: return "mono";
        case StrategyKind::hawkes_multi: return "multi";
        case StrategyKind::poisson: return "poisson";
    }
    return "?";
}

inline StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "mono") return StrategyKind::hawkes_mono;
    if (s == "multi") return StrategyKind::hawkes_multi;
    if (s == "poisson") return StrategyKind::poisson;
    throw error("unknown strategy kind: " + s);
}

struct BacktestConfig {
    double scale = 0.001;         // s, deviation from the static liquidation scheme
    double reg_window = 0.5;      // trading starts after this warm-up (hours)
    double adj_lag = 0.0;         // hours; grid times closer to a trade are skipped
    bool half_tick_penalty = false;
    bool impact_cost = false;     // include the (dX)^2 / (2q) term of the cost
    bool simulated_data = true;   // disables the adjustment-lag filter
    StrategyKind strategy = StrategyKind::hawkes_multi;

    void validate() const {
        if (scale <= 0.0 || scale > 1.0) throw error("BacktestConfig: scale outside (0, 1]");
    }
};

/// Quote-driven jump times the strategy may trade at: inside (reg_window, T)
/// and, on real data, further than adj_lag from the last trade-driven jump.
inline std::vector<double> build_theta_grid(const DayWindow& w, double reg_window,
                                            double adj_lag, bool simulated_data = true) {
    std::vector<double> grid;
    double last_trade = -std::numeric_limits<double>::infinity();
    for (const auto& e : w.events) {
        if (e.is_trade()) {
            last_trade = e.time;
            continue;
        }
        if (e.time <= reg_window || e.time >= w.horizon) continue;
        if (!simulated_data && adj_lag > 0.0 && e.time - last_trade <= adj_lag) continue;
        grid.push_back(e.time);
    }
    return grid;
}

struct DayResult {
    double gain = 0.0;            // at the midprice (with optional impact cost)
    double gain_with_penalty = 0.0;
    double traded_volume = 0.0;   // sum |dX|
    double max_trade = 0.0;       // max |xi|
    std::size_t trades = 0;
};

/// Replays one strategy over one window. The tape is assumed unaffected by our
/// own trades: D and delta are driven by the observed events only, warmed up
/// from the window start, and executions settle at the observed midprice (plus
/// the quadratic impact term when enabled).
inline DayResult run_day(const DayWindow& w, const HawkesSpec& hawkes,
                         const PropagatorSpec& prop, const BacktestConfig& cfg) {
    cfg.validate();
    StrategyParams params = StrategyParams::make(hawkes, prop);
    PropagatorFlow impact(prop);
    ImbalanceFlow imbalance(hawkes);

    double position = 0.0;
    double cost = 0.0;
    double penalty = 0.0;
    DayResult res;

    auto execute = [&](double price, double xi) {
        cost += price * xi;
        if (cfg.impact_cost) cost += xi * xi / (2.0 * prop.q);
        penalty += w.tick_size / 2.0 * std::abs(xi);
        position += xi;
        res.traded_volume += std::abs(xi);
        res.max_trade = std::max(res.max_trade, std::abs(xi));
        ++res.trades;
    };

    double last_trade = -std::numeric_limits<double>::infinity();
    double mid = w.base_mid;
    for (const auto& e : w.events) {
        mid += e.price_jump;
        if (e.is_trade()) {
            impact.add_trade(e.time, e.price_jump);
            imbalance.add_trade(e);
            last_trade = e.time;
            continue;
        }
        if (e.time <= cfg.reg_window || e.time >= w.horizon) continue;
        if (!cfg.simulated_data && cfg.adj_lag > 0.0 && e.time - last_trade <= cfg.adj_lag)
            continue;
        impact.advance(e.time);
        imbalance.advance(e.time);

        ExecutionState st;
        st.position = position;
        st.transient = impact.transient();
        st.deltas = imbalance.deltas();
        st.t = e.time;
        st.horizon = w.horizon;
        double xi = 0.0;
        switch (cfg.strategy) {
            case StrategyKind::poisson: xi = poisson_trade(params, st, cfg.scale); break;
            default: xi = optimal_trade(params, st, cfg.scale); break;
        }
        execute(mid, xi);
    }

    // close the position at the end-of-window midprice
    if (position != 0.0) execute(w.mid_end(), -position);

    res.gain = -cost;
    res.gain_with_penalty = -cost - penalty;
    return res;
}

struct BacktestReport {
    std::vector<double> gains;       // per day, penalty applied when configured
    std::vector<double> cumulative;
    double sharpe = 0.0;             // sqrt(n) * mean / std
    double positivity = 0.0;
    double skew = 0.0;
    double kurtosis = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

/// Aggregates per-day gains into the summary statistics. The statistics are
/// invariant under scaling all gains by a positive constant.
inline BacktestReport aggregate_report(const std::vector<double>& gains) {
    if (gains.size() < 2) throw error("aggregate_report: need at least two days");
    BacktestReport rep;
    rep.gains = gains;
    double n = static_cast<double>(gains.size());
    double mean = 0.0;
    for (double y : gains) mean += y;
    mean /= n;
    double var = 0.0, m3 = 0.0, m4 = 0.0, pos = 0.0;
    for (double y : gains) {
        double d = y - mean;
        var += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        if (y > 0.0) pos += 1.0;
    }
    var /= (n - 1.0);
    if (var <= 0.0) throw error("aggregate_report: zero variance of daily gains");
    double sd = std::sqrt(var);
    rep.mean = mean;
    rep.stddev = sd;
    rep.sharpe = std::sqrt(n) * mean / sd;
    rep.positivity = pos / n;
    rep.skew = (m3 / n) / (sd * sd * sd);
    rep.kurtosis = (m4 / n) / (var * var);
    rep.cumulative.resize(gains.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        acc += gains[i];
        rep.cumulative[i] = acc;
    }
    return rep;
}

/// Runs the strategy over every window (in parallel) and aggregates.
inline BacktestReport run_backtest(const std::vector<DayWindow>& windows,
                                   const HawkesSpec& hawkes, const PropagatorSpec& prop,
                                   const BacktestConfig& cfg, int threads = 1) {
    auto day_results = parallel_map<DayResult>(windows.size(), threads, [&](std::size_t i) {
        return run_day(windows[i], hawkes, prop, cfg);
    });
    std::vector<double> gains(day_results.size());
    for (std::size_t i = 0; i < gains.size(); ++i)
        gains[i] = cfg.half_tick_penalty ? day_results[i].gain_with_penalty : day_results[i].gain;
    return aggregate_report(gains);
}

} // namespace hawkes_impact
