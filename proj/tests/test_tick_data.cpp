#include "hawkes_impact/tick_data.hpp"

#include "hawkes_impact/simulate.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace hawkes_impact;

namespace {

const char* kHeader = "ts_ms,bid_px,bid_qty,ask_px,ask_qty,trade_px,trade_qty\n";

} // namespace

TEST_CASE("empty file after the header parses to nothing") {
    auto records = parse_ticks(kHeader);
    CHECK(records.empty());
}

TEST_CASE("quote updates parse without trade fields") {
    std::string text = std::string(kHeader) + "1200,31.9975,800,32.0025,900,,\n";
    auto records = parse_ticks(text);
    REQUIRE(records.size() == 1);
    CHECK(records[0].ts_ms == 1200);
    CHECK(records[0].mid() == Catch::Approx(32.0));
    CHECK_FALSE(records[0].trade_px.has_value());
}

TEST_CASE("crossed books are rejected with the line number") {
    std::string text = std::string(kHeader) + "5,32.01,100,32.00,100,,\n";
    try {
        parse_ticks(text);
        FAIL("expected a parse error");
    } catch (const error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("crossed") != std::string::npos);
    }
}

TEST_CASE("column and timestamp errors carry diagnostics") {
    CHECK_THROWS_AS(parse_ticks(std::string(kHeader) + "1,2,3\n"), error);
    CHECK_THROWS_AS(parse_ticks(std::string(kHeader) +
                                "10,31.9,1,32.0,1,,\n5,31.9,1,32.0,1,,\n"),
                    error);
    CHECK_THROWS_AS(parse_ticks("bogus,header\n"), error);
    // trade price without quantity
    CHECK_THROWS_AS(parse_ticks(std::string(kHeader) + "10,31.9,1,32.0,1,32.0,\n"), error);
}

TEST_CASE("same-millisecond trades aggregate volumes and keep the last book") {
    std::string text = std::string(kHeader);
    text += "1000,31.9975,500,32.0025,500,32.0025,100\n";
    text += "1000,32.0025,400,32.0075,400,32.0075,200\n";
    text += "2000,32.0025,400,32.0075,400,,\n";
    auto agg = aggregate_ms(parse_ticks(text));
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].trade_qty.value() == Catch::Approx(300.0));
    CHECK(agg[0].mid() == Catch::Approx(32.005));
    CHECK_FALSE(agg[1].trade_qty.has_value());
}

TEST_CASE("single records aggregate to themselves") {
    std::string text = std::string(kHeader) + "1000,31.9975,500,32.0025,500,,\n";
    auto records = parse_ticks(text);
    auto agg = aggregate_ms(records);
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].ts_ms == records[0].ts_ms);
    CHECK(agg[0].mid() == records[0].mid());
}

TEST_CASE("offsetting quote moves inside one millisecond drop out") {
    std::string text = std::string(kHeader);
    text += "0,31.9975,500,32.0025,500,,\n";        // baseline, mid 32.0
    text += "1000,32.0025,500,32.0075,500,,\n";     // mid up
    text += "1000,31.9975,500,32.0025,500,,\n";     // and back, same ms
    text += "2000,32.0025,500,32.0075,500,,\n";     // real move
    auto w = classify_events(aggregate_ms(parse_ticks(text)), 0.005);
    REQUIRE(w.events.size() == 1);
    CHECK(w.events[0].time == Catch::Approx(hours_from_ms(2000)));
    CHECK(w.events[0].kind == EventKind::quote);
    CHECK(w.events[0].price_jump == Catch::Approx(0.005));
}

TEST_CASE("classification separates trade-driven and quote-driven moves") {
    std::string text = std::string(kHeader);
    text += "0,31.9975,500,32.0025,500,,\n";                  // baseline
    text += "1000,32.0000,500,32.0050,500,32.0025,150\n";     // trade, mid +0.0025
    text += "2000,31.9975,500,32.0025,500,,\n";               // quote, mid -0.0025
    text += "3000,31.9975,500,32.0025,500,32.0025,80\n";      // trade, no mid move: dropped
    auto w = classify_events(aggregate_ms(parse_ticks(text)), 0.005);
    REQUIRE(w.events.size() == 2);
    CHECK(w.events[0].kind == EventKind::trade);
    CHECK(w.events[0].volume == Catch::Approx(150.0));
    CHECK(w.events[0].side == +1);
    CHECK(w.events[0].price_jump == Catch::Approx(0.0025));
    CHECK(w.events[1].kind == EventKind::quote);
    CHECK(w.events[1].side == -1);
}

TEST_CASE("classify then aggregate is idempotent on aggregated input") {
    std::string text = std::string(kHeader);
    text += "0,31.9975,500,32.0025,500,,\n";
    text += "1000,32.0000,500,32.0050,500,32.0025,150\n";
    text += "1500,32.0025,400,32.0075,600,,\n";
    text += "2500,32.0000,500,32.0050,500,,\n";
    auto agg = aggregate_ms(parse_ticks(text));
    auto again = aggregate_ms(agg);
    REQUIRE(agg.size() == again.size());
    auto w1 = classify_events(agg, 0.005);
    auto w2 = classify_events(again, 0.005);
    REQUIRE(w1.events.size() == w2.events.size());
    for (std::size_t i = 0; i < w1.events.size(); ++i) {
        CHECK(w1.events[i].time == w2.events[i].time);
        CHECK(w1.events[i].price_jump == w2.events[i].price_jump);
    }
}

TEST_CASE("event jumps sum to the net midprice change") {
    auto spec = HawkesSpec::make(40.0, {120.0, 360.0}, {0.05, 0.95}, {84.0, 36.0}, {45.0, 5.0},
                                 MarkType::volume, 978.0, 0.0025);
    auto prop = PropagatorSpec::make(3.20, {0.70}, {130.0}, 2.0 / 3600.0, 0.0);
    auto trades = simulate_flow(spec, exponential_volumes(978.0), 2.0, 5);
    PriceSimConfig pcfg;
    pcfg.quote_rate = 1500.0;
    pcfg.tick_size = 0.005;
    pcfg.base_mid = 38.0;
    auto w = simulate_price(trades, prop, stepped_jumps(0.005, 978.0), 2.0, 5, pcfg);

    std::string csv = write_ticks(w, 1700.0, 5);
    auto parsed = classify_events(aggregate_ms(parse_ticks(csv)), 0.005);
    double jump_sum = 0.0;
    for (const auto& e : parsed.events) jump_sum += e.price_jump;
    auto records = parse_ticks(csv);
    CHECK(jump_sum ==
          Catch::Approx(records.back().mid() - records.front().mid()).margin(1e-9));
}

TEST_CASE("simulated windows round-trip through the tick format") {
    auto spec = HawkesSpec::make(15.0, {60.0, 360.0}, {0.1, 0.9}, {110.5, 19.5}, {66.5, 3.5},
                                 MarkType::volume, 776.0, 0.0025);
    auto prop = PropagatorSpec::make(2.70, {0.50, 0.10}, {60.0, 360.0}, 4.0 / 3600.0, 0.10);
    auto trades = simulate_flow(spec, exponential_volumes(776.0), 2.0, 21);
    PriceSimConfig pcfg;
    pcfg.quote_rate = 10.0 * 2.0 * spec.kappa_bar();
    pcfg.tick_size = 0.005;
    pcfg.base_mid = 32.0;
    auto w = simulate_price(trades, prop, stepped_jumps(0.005, 776.0), 2.0, 21, pcfg);

    auto parsed = classify_events(aggregate_ms(parse_ticks(write_ticks(w, 1400.0, 21))), 0.005,
                                  2.0, "roundtrip");
    REQUIRE(parsed.events.size() == w.events.size());
    for (std::size_t i = 0; i < w.events.size(); ++i) {
        CHECK(parsed.events[i].time == Catch::Approx(w.events[i].time).margin(1e-15));
        CHECK(parsed.events[i].kind == w.events[i].kind);
        CHECK(parsed.events[i].price_jump == Catch::Approx(w.events[i].price_jump).margin(1e-12));
        CHECK(parsed.events[i].volume == Catch::Approx(w.events[i].volume).margin(1e-9));
        CHECK(parsed.events[i].side == w.events[i].side);
    }
    CHECK(parsed.base_mid == Catch::Approx(w.base_mid).margin(1e-12));
}

TEST_CASE("dataset statistics") {
    SECTION("equal volumes give unit dispersion") {
        DayWindow w;
        w.horizon = 2.0;
        w.tick_size = 0.005;
        for (int i = 1; i <= 4; ++i) {
            MarkedEvent e;
            e.time = 0.1 * i;
            e.kind = EventKind::trade;
            e.volume = 500.0;
            e.price_jump = 0.0025;
            e.side = +1;
            w.events.push_back(e);
        }
        auto stats = compute_stats({w});
        CHECK(stats.m1 == Catch::Approx(500.0));
        CHECK(stats.m2_over_m1sq == Catch::Approx(1.0));
        CHECK(stats.fraction_trade_driven == Catch::Approx(1.0));
    }

    SECTION("hand-computed volume dispersion") {
        DayWindow w;
        w.horizon = 2.0;
        w.tick_size = 0.005;
        double volumes[2] = {1.0, 3.0};
        for (int i = 0; i < 2; ++i) {
            MarkedEvent e;
            e.time = 0.2 + 0.1 * i;
            e.kind = EventKind::trade;
            e.volume = volumes[i];
            e.price_jump = 0.0025;
            e.side = +1;
            w.events.push_back(e);
        }
        auto stats = compute_stats({w});
        CHECK(stats.m1 == Catch::Approx(2.0));
        CHECK(stats.m2_over_m1sq == Catch::Approx(1.25));
    }

    SECTION("empty input is an error") {
        CHECK_THROWS_AS(compute_stats({}), error);
    }
}
