#pragma once

#include "hawkes_impact/common.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace hawkes_impact {

enum class EventKind { trade, quote };

/// One midprice-moving market event.
struct MarkedEvent {
    double time = 0.0;       // hours since window start, in (0, T)
    EventKind kind = EventKind::quote;
    double price_jump = 0.0; // signed midprice change (currency)
    double volume = 0.0;     // executed shares, 0 for quote events
    int side = 0;            // sign of the price jump: +1 / -1

    bool is_trade() const { return kind == EventKind::trade; }
};

/// One day window of classified events.
struct DayWindow {
    std::string label;
    std::vector<MarkedEvent> events; // strictly increasing times
    double horizon = 2.0;            // window length T (hours)
    double tick_size = 0.0;          // 0 means "no tick grid" (exact simulation)
    double base_mid = 0.0;           // midprice just before the first event

    // Midprice right after the last event with time <= t.
    double mid_at(double t) const {
        double p = base_mid;
        for (const auto& e : events) {
            if (e.time > t) break;
            p += e.price_jump;
        }
        return p;
    }

    double mid_end() const { return mid_at(horizon); }

    void validate() const {
        double prev = 0.0;
        for (const auto& e : events) {
            if (e.time <= prev) throw error(label + ": event times must be strictly increasing");
            if (e.time >= horizon) throw error(label + ": event time beyond window horizon");
            if (e.is_trade() && e.volume <= 0.0) throw error(label + ": trade event without volume");
            prev = e.time;
        }
    }
};

inline std::size_t count_events(const std::vector<DayWindow>& windows, EventKind kind) {
    std::size_t n = 0;
    for (const auto& w : windows)
        n += static_cast<std::size_t>(
            std::count_if(w.events.begin(), w.events.end(),
                          [&](const MarkedEvent& e) { return e.kind == kind; }));
    return n;
}

} // namespace hawkes_impact
