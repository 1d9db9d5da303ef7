#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hawkes_impact {

// All rates and times are expressed in hours / inverse hours, prices in
// currency units and volumes in shares, matching the tick-file conventions.

class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kHoursPerMs = 1.0 / 3.6e6;

inline double hours_from_ms(long long ms) { return static_cast<double>(ms) * kHoursPerMs; }

inline long long ms_from_hours(double t) { return static_cast<long long>(std::llround(t / kHoursPerMs)); }

inline bool approx_equal(double a, double b, double rel = 1e-12, double abs = 1e-15) {
    return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

inline double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

} // namespace hawkes_impact
