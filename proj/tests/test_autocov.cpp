#include "hawkes_impact/autocov.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace hawkes_impact;

namespace {

HawkesSpec unit_spec(double kappa_inf, std::vector<double> betas, std::vector<double> weights,
                     double iota) {
    return HawkesSpec::make(kappa_inf, std::move(betas), std::move(weights), {iota / 2.0, 0.0},
                            {iota / 2.0, 0.0}, MarkType::unit);
}

} // namespace

TEST_CASE("mono-exponential closed form, hand-derived") {
    // beta = 100, iota = 50, kappa_inf = 10:
    // b = beta - iota = 50, kappa_bar = 20, a b = (beta + b)(beta - b) kappa_bar
    auto spec = unit_spec(10.0, {100.0}, {1.0}, 50.0);
    auto ac = autocov_params(spec);
    REQUIRE(ac.b.size() == 1);
    CHECK(ac.b[0] == Catch::Approx(50.0).margin(1e-10));
    CHECK(ac.a[0] == Catch::Approx(3000.0).epsilon(1e-10));
    CHECK(ac.kappa_bar == Catch::Approx(20.0));
}

TEST_CASE("general machinery agrees with the mono closed form on random specs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double beta = 20.0 + 400.0 * unif(rng);
        double iota = beta * (0.05 + 0.9 * unif(rng));
        double kappa_inf = 1.0 + 30.0 * unif(rng);
        auto spec = unit_spec(kappa_inf, {beta}, {1.0}, iota);

        auto general = autocov_params(spec);
        auto closed = autocov_mono_closed_form(spec);
        REQUIRE(general.b.size() == 1);
        CHECK(general.b[0] == Catch::Approx(closed.b[0]).epsilon(1e-10));
        CHECK(general.a[0] == Catch::Approx(closed.a[0]).epsilon(1e-10));
    }
}

TEST_CASE("root interlacing and positive amplitudes") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::size_t p = 2 + static_cast<std::size_t>(unif(rng) * 3.0);
        std::vector<double> betas, weights;
        double b = 5.0 + 30.0 * unif(rng);
        for (std::size_t s = 0; s < p; ++s) {
            betas.push_back(b);
            weights.push_back(0.1 + unif(rng));
            b += 20.0 + 150.0 * unif(rng);
        }
        double wsum = sum(weights);
        for (double& w : weights) w /= wsum;
        double norm = 0.0;
        for (std::size_t s = 0; s < p; ++s) norm += weights[s] / betas[s];
        double iota = (0.1 + 0.85 * unif(rng)) / norm;

        auto spec = unit_spec(5.0, betas, weights, iota);
        auto ac = autocov_params(spec);
        REQUIRE(ac.b.size() == p);
        double prev = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            CHECK(ac.b[j] > prev);
            CHECK(ac.b[j] < spec.betas[j]);
            CHECK(ac.a[j] > 0.0);
            prev = spec.betas[j];
        }
    }
}

TEST_CASE("non-stationary spec is rejected") {
    HawkesSpec s;
    s.kappa_inf = 10.0;
    s.betas = {60.0};
    s.weights = {1.0};
    s.phi_s = {70.0, 0.0};
    s.phi_c = {0.0, 0.0};
    s.mark_type = MarkType::unit;
    CHECK_THROWS_AS(autocov_params(s), error);
}
