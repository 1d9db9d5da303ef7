#pragma once

#include "hawkes_impact/intensity.hpp"

#include <deque>

namespace hawkes_impact {

/// Running value of sum_tau dM_tau * G(t - tau) over past trades, maintained in
/// O(scales) per update. The exponential tails are carried by per-scale
/// decaying sums; trades younger than the adjustment lag get an exact
/// correction replacing the tail by the linear ramp.
class PropagatorFlow {
public:
    explicit PropagatorFlow(const PropagatorSpec& prop)
        : prop_(&prop), scale_sums_(prop.scales(), 0.0) {}

    void add_trade(double time, double price_jump) {
        advance(time);
        for (double& s : scale_sums_) s += price_jump;
        permanent_ += price_jump;
        if (prop_->adj_lag > 0.0) young_.push_back({time, price_jump});
    }

    void advance(double time) {
        if (time < last_time_) throw error("PropagatorFlow: time runs backwards");
        double dt = time - last_time_;
        if (dt > 0.0)
            for (std::size_t i = 0; i < scale_sums_.size(); ++i)
                scale_sums_[i] *= std::exp(-prop_->rhos[i] * dt);
        last_time_ = time;
        while (!young_.empty() && time - young_.front().time > prop_->adj_lag) young_.pop_front();
    }

    /// sum dM * G(t - tau); call advance(t) first.
    double propagated() const {
        double v = prop_->gamma * prop_->nu * permanent_;
        for (std::size_t i = 0; i < scale_sums_.size(); ++i)
            v += prop_->gamma * prop_->lambdas[i] * scale_sums_[i];
        return v + ramp_correction();
    }

    /// Transient impact level D_t = sum dM * [G(t - tau) - G(inf)].
    double transient() const {
        double v = 0.0;
        for (std::size_t i = 0; i < scale_sums_.size(); ++i)
            v += prop_->gamma * prop_->lambdas[i] * scale_sums_[i];
        return v + ramp_correction();
    }

private:
    struct YoungTrade {
        double time;
        double jump;
    };

    // Trades still inside the adjustment lag follow the ramp, not the
    // resilience tail the scale sums carry; G - R cancels the permanent part.
    double ramp_correction() const {
        double c = 0.0;
        for (const auto& tr : young_) {
            double u = last_time_ - tr.time;
            c += tr.jump * (prop_->value(u) - prop_->resilience(u));
        }
        return c;
    }

    const PropagatorSpec* prop_;
    std::vector<double> scale_sums_;
    std::deque<YoungTrade> young_;
    double permanent_ = 0.0;
    double last_time_ = 0.0;
};

/// Running intensity-imbalance vector delta_i = kappa+_i - kappa-_i of a
/// Hawkes spec, updated trade by trade.
class ImbalanceFlow {
public:
    explicit ImbalanceFlow(const HawkesSpec& spec) : spec_(&spec), delta_(spec.scales(), 0.0) {}

    void advance(double time) {
        if (time < last_time_) throw error("ImbalanceFlow: time runs backwards");
        double dt = time - last_time_;
        if (dt > 0.0)
            for (std::size_t i = 0; i < delta_.size(); ++i)
                delta_[i] *= std::exp(-spec_->betas[i] * dt);
        last_time_ = time;
    }

    void add_trade(const MarkedEvent& e) {
        advance(e.time);
        double x = mark_of(*spec_, e);
        double d = spec_->phi_s(x) - spec_->phi_c(x);
        for (std::size_t i = 0; i < delta_.size(); ++i)
            delta_[i] += static_cast<double>(e.side) * spec_->weights[i] * d;
    }

    const std::vector<double>& deltas() const { return delta_; }

private:
    const HawkesSpec* spec_;
    std::vector<double> delta_;
    double last_time_ = 0.0;
};

} // namespace hawkes_impact
