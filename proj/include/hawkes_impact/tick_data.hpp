#pragma once

#include "hawkes_impact/events.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hawkes_impact {

/// One line of the tick file:
/// ts_ms,bid_px,bid_qty,ask_px,ask_qty,trade_px,trade_qty
/// Trade fields are empty for pure quote updates.
struct TickRecord {
    long long ts_ms = 0;
    double bid_px = 0.0;
    double bid_qty = 0.0;
    double ask_px = 0.0;
    double ask_qty = 0.0;
    std::optional<double> trade_px;
    std::optional<double> trade_qty;

    double mid() const { return 0.5 * (bid_px + ask_px); }
};

inline const char* tick_csv_header() { return "ts_ms,bid_px,bid_qty,ask_px,ask_qty,trade_px,trade_qty"; }

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace detail

/// Parses and validates a tick CSV. Malformed lines are reported with their
/// 1-based line number.
inline std::vector<TickRecord> parse_ticks(std::string_view text) {
    std::vector<TickRecord> records;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    long long prev_ts = -1;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        if (!saw_header) {
            if (line != tick_csv_header())
                throw error("tick file line 1: expected header '" + std::string(tick_csv_header()) + "'");
            saw_header = true;
            continue;
        }
        auto fields = detail::split_csv(line);
        if (fields.size() != 7)
            throw error("tick file line " + std::to_string(lineno) + ": expected 7 columns, got " +
                        std::to_string(fields.size()));
        TickRecord r;
        double ts = 0.0;
        if (!detail::parse_double(fields[0], ts) || !detail::parse_double(fields[1], r.bid_px) ||
            !detail::parse_double(fields[2], r.bid_qty) || !detail::parse_double(fields[3], r.ask_px) ||
            !detail::parse_double(fields[4], r.ask_qty))
            throw error("tick file line " + std::to_string(lineno) + ": malformed numeric field");
        r.ts_ms = static_cast<long long>(ts);
        bool has_px = !fields[5].empty();
        bool has_qty = !fields[6].empty();
        if (has_px != has_qty)
            throw error("tick file line " + std::to_string(lineno) +
                        ": trade price and quantity must both be present or both empty");
        if (has_px) {
            double px = 0.0, qty = 0.0;
            if (!detail::parse_double(fields[5], px) || !detail::parse_double(fields[6], qty))
                throw error("tick file line " + std::to_string(lineno) + ": malformed trade field");
            r.trade_px = px;
            r.trade_qty = qty;
        }
        if (r.bid_px >= r.ask_px)
            throw error("tick file line " + std::to_string(lineno) + ": crossed book (bid >= ask)");
        if (r.bid_qty < 0.0 || r.ask_qty < 0.0 || (r.trade_qty && *r.trade_qty < 0.0))
            throw error("tick file line " + std::to_string(lineno) + ": negative quantity");
        if (r.ts_ms < prev_ts)
            throw error("tick file line " + std::to_string(lineno) + ": timestamps must be nondecreasing");
        prev_ts = r.ts_ms;
        records.push_back(r);
    }
    if (!saw_header) throw error("tick file: missing header line");
    return records;
}

/// Collapses records sharing a millisecond: last best prices win (net change
/// over the stamp), executed volumes are summed.
inline std::vector<TickRecord> aggregate_ms(const std::vector<TickRecord>& records) {
    std::vector<TickRecord> out;
    for (const auto& r : records) {
        if (!out.empty() && out.back().ts_ms == r.ts_ms) {
            TickRecord& a = out.back();
            a.bid_px = r.bid_px;
            a.ask_px = r.ask_px;
            a.bid_qty = r.bid_qty;
            a.ask_qty = r.ask_qty;
            if (r.trade_qty) {
                a.trade_qty = a.trade_qty.value_or(0.0) + *r.trade_qty;
                a.trade_px = r.trade_px;
            }
        } else {
            out.push_back(r);
        }
    }
    return out;
}

/// Emits one MarkedEvent per stamp with a net midprice change. The first
/// record only sets the baseline mid. Trades that do not move the mid are
/// dropped; stamps with volume and a mid change are trade-driven, the rest
/// quote-driven. Midprices are snapped to integer half-ticks internally.
inline DayWindow classify_events(const std::vector<TickRecord>& aggregated, double tick_size,
                                 double horizon = 2.0, std::string label = {}) {
    if (tick_size <= 0.0) throw error("classify_events: tick size must be positive");
    DayWindow w;
    w.label = std::move(label);
    w.horizon = horizon;
    w.tick_size = tick_size;
    if (aggregated.empty()) return w;

    double half = tick_size / 2.0;
    auto to_half_ticks = [half](double px) { return std::llround(px / half); };

    long long prev_mid = to_half_ticks(aggregated.front().mid());
    w.base_mid = static_cast<double>(prev_mid) * half;
    for (std::size_t i = 1; i < aggregated.size(); ++i) {
        const auto& r = aggregated[i];
        long long mid = to_half_ticks(r.mid());
        long long dmid = mid - prev_mid;
        prev_mid = mid;
        if (dmid == 0) continue;
        MarkedEvent e;
        e.time = hours_from_ms(r.ts_ms);
        e.price_jump = static_cast<double>(dmid) * half;
        e.side = dmid > 0 ? +1 : -1;
        bool traded = r.trade_qty && *r.trade_qty > 0.0;
        e.kind = traded ? EventKind::trade : EventKind::quote;
        e.volume = traded ? *r.trade_qty : 0.0;
        if (e.time <= 0.0 || e.time >= horizon) continue;
        w.events.push_back(e);
    }
    w.validate();
    return w;
}

/// Sample statistics over a set of day windows.
struct DatasetStats {
    double mean_mid = 0.0;          // time-weighted average midprice
    double tick_size = 0.0;
    double mid_changes_per_hour = 0.0;
    double fraction_trade_driven = 0.0;
    double m1 = 0.0;                // mean volume of price-moving trades
    double m2_over_m1sq = 0.0;
    double mean_first_queue = 0.0;
    double m_bar = 0.0;             // mean absolute price jump of trades
};

/// Per-file inputs for compute_stats that are not part of the DayWindow.
struct BookSnapshotStats {
    double time_weighted_mid = 0.0; // integral of mid over the window / horizon
    double mean_queue = 0.0;        // mean of (bid_qty + ask_qty) / 2 over records
};

inline BookSnapshotStats book_snapshot_stats(const std::vector<TickRecord>& aggregated,
                                             double horizon) {
    BookSnapshotStats s;
    if (aggregated.empty()) return s;
    double mid_integral = 0.0;
    double queue_sum = 0.0;
    for (std::size_t i = 0; i < aggregated.size(); ++i) {
        double t0 = hours_from_ms(aggregated[i].ts_ms);
        double t1 = i + 1 < aggregated.size() ? hours_from_ms(aggregated[i + 1].ts_ms) : horizon;
        mid_integral += aggregated[i].mid() * std::max(0.0, t1 - t0);
        queue_sum += 0.5 * (aggregated[i].bid_qty + aggregated[i].ask_qty);
    }
    s.time_weighted_mid = mid_integral / horizon;
    s.mean_queue = queue_sum / static_cast<double>(aggregated.size());
    return s;
}

inline DatasetStats compute_stats(const std::vector<DayWindow>& windows,
                                  const std::vector<BookSnapshotStats>& books = {}) {
    if (windows.empty()) throw error("compute_stats: no windows");
    DatasetStats s;
    s.tick_size = windows.front().tick_size;
    double hours = 0.0;
    std::size_t n_events = 0, n_trades = 0;
    double vol_sum = 0.0, vol_sq_sum = 0.0, jump_sum = 0.0;
    for (const auto& w : windows) {
        hours += w.horizon;
        n_events += w.events.size();
        for (const auto& e : w.events) {
            if (!e.is_trade()) continue;
            ++n_trades;
            vol_sum += e.volume;
            vol_sq_sum += e.volume * e.volume;
            jump_sum += std::abs(e.price_jump);
        }
    }
    s.mid_changes_per_hour = static_cast<double>(n_events) / hours;
    s.fraction_trade_driven =
        n_events == 0 ? 0.0 : static_cast<double>(n_trades) / static_cast<double>(n_events);
    if (n_trades > 0) {
        s.m1 = vol_sum / static_cast<double>(n_trades);
        double m2 = vol_sq_sum / static_cast<double>(n_trades);
        s.m2_over_m1sq = m2 / (s.m1 * s.m1);
        s.m_bar = jump_sum / static_cast<double>(n_trades);
    }
    if (!books.empty()) {
        double mid = 0.0, queue = 0.0;
        for (const auto& b : books) {
            mid += b.time_weighted_mid;
            queue += b.mean_queue;
        }
        s.mean_mid = mid / static_cast<double>(books.size());
        s.mean_first_queue = queue / static_cast<double>(books.size());
    }
    return s;
}

/// Renders a simulated window in the tick CSV format. The book is synthesized
/// as mid -/+ half a tick with exponential queue sizes; trades print at the
/// touched side. Prices are written with enough digits to round-trip half-tick
/// multiples exactly.
inline std::string write_ticks(const DayWindow& w, double mean_queue, std::uint64_t seed) {
    if (w.tick_size <= 0.0) throw error("write_ticks: window has no tick grid");
    std::mt19937_64 rng(seed ^ 0x51ab7cd2d8f31ull);
    std::exponential_distribution<double> queue_law(1.0 / mean_queue);
    auto queue = [&]() { return std::max(1.0, std::round(queue_law(rng))); };

    std::string out = tick_csv_header();
    out += '\n';
    char buf[256];
    double half = w.tick_size / 2.0;
    double mid = w.base_mid;
    auto emit = [&](long long ts, double m, const MarkedEvent* trade) {
        double bid = m - half;
        double ask = m + half;
        if (trade) {
            double px = trade->side > 0 ? ask : bid;
            std::snprintf(buf, sizeof buf, "%lld,%.4f,%.0f,%.4f,%.0f,%.4f,%.0f\n", ts, bid, queue(),
                          ask, queue(), px, trade->volume);
        } else {
            std::snprintf(buf, sizeof buf, "%lld,%.4f,%.0f,%.4f,%.0f,,\n", ts, bid, queue(), ask,
                          queue());
        }
        out += buf;
    };

    emit(0, mid, nullptr); // opening snapshot, sets the baseline mid
    for (const auto& e : w.events) {
        mid += e.price_jump;
        emit(ms_from_hours(e.time), mid, e.is_trade() ? &e : nullptr);
    }
    return out;
}

} // namespace hawkes_impact
