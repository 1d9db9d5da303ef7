#include "hawkes_impact/strategy.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

using namespace hawkes_impact;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = scale * unif(rng);
    return m;
}

StrategyParams martingale_params() {
    // iota_s - iota_c = 40 at speed 100 with lambda = 0.4, nu = 0.6
    auto hawkes = HawkesSpec::make(20.0, {100.0}, {1.0}, {10.0, 45.0}, {10.0, 5.0},
                                   MarkType::volume, 500.0, 0.0025);
    auto prop = PropagatorSpec::make(1.0, {0.4}, {100.0}, 0.0, 0.0, 500.0 / 0.0025);
    return StrategyParams::make(hawkes, prop);
}

ExecutionState state_at(double t, double horizon, double position, double transient,
                        std::vector<double> deltas) {
    ExecutionState st;
    st.t = t;
    st.horizon = horizon;
    st.position = position;
    st.transient = transient;
    st.deltas = std::move(deltas);
    return st;
}

} // namespace

TEST_CASE("zeta and omega at zero") {
    Eigen::MatrixXd z = zeta(Eigen::MatrixXd::Zero(3, 3));
    Eigen::MatrixXd w = omega(Eigen::MatrixXd::Zero(3, 3));
    CHECK((z - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
    CHECK((w - 0.5 * Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("scalar zeta and omega closed forms") {
    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    CHECK(zeta(one)(0, 0) == Catch::Approx(0.6321205588285577).epsilon(1e-14));
    CHECK(omega(one)(0, 0) == Catch::Approx(0.36787944117144233).epsilon(1e-14));
}

TEST_CASE("series matches the closed forms on random invertible matrices") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(trial % 6);
        double scale = trial % 3 == 0 ? 8.0 : 0.8; // both reduction branches
        Eigen::MatrixXd m = random_matrix(rng, n, scale);
        if (std::abs(m.determinant()) < 1e-6) continue;
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd em = (-m).exp(); // independent oracle path
        Eigen::MatrixXd minv = m.inverse();
        Eigen::MatrixXd zeta_ref = minv * (id - em);
        Eigen::MatrixXd omega_ref = minv * minv * (em - id + m);
        CHECK((zeta(m) - zeta_ref).norm() <= 1e-10 * std::max(1.0, zeta_ref.norm()));
        CHECK((omega(m) - omega_ref).norm() <= 1e-10 * std::max(1.0, omega_ref.norm()));
    }
}

TEST_CASE("series identities: zeta + M omega = I and exp(-M) = I - M zeta") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + trial % 4;
        Eigen::MatrixXd m = random_matrix(rng, n, 3.0);
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd z = zeta(m);
        Eigen::MatrixXd w = omega(m);
        CHECK((z + m * w - id).norm() <= 1e-12 * std::max(1.0, z.norm()));
        CHECK(((-m).exp() - (id - m * z)).norm() <= 1e-10);
    }
}

TEST_CASE("optimal position vanishes without signal and leans against impact") {
    auto p = martingale_params();
    CHECK(optimal_position(p, state_at(0.5, 2.0, 3.0, 0.0, {0.0})) == Catch::Approx(0.0));
    CHECK(optimal_position(p, state_at(0.5, 2.0, 0.0, 0.02, {0.0})) < 0.0);
    CHECK_THROWS_AS(optimal_position(p, state_at(2.0, 2.0, 0.0, 0.0, {0.0})), error);
}

TEST_CASE("matrix strategy equals the scalar evaluation for p = 1") {
    auto p = martingale_params();
    double u = 0.8;
    double D = 0.015, delta = 12.0;
    auto st = state_at(p.rho * 0.0, 0.8 + 0.0, 0.0, D, {delta}); // t = 0, T = u
    st.horizon = u;

    // scalar-path oracle
    double h = p.H(0, 0);
    double x = u * h;
    double zs = (1.0 - std::exp(-x)) / x;
    double ws = (std::exp(-x) - 1.0 + x) / (x * x);
    double k = p.m1 / (2.0 * p.rho) *
               (1.0 + p.rho * u / (2.0 + p.rho * u) * (zs + p.nu * p.rho * u * ws));
    double expect = (-(1.0 + p.rho * u) * D + (2.0 + p.rho * u) * k * delta) / (1.0 - p.eps);
    CHECK(optimal_position(p, st) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("zero state trades nothing at any scale") {
    auto p = martingale_params();
    CHECK(optimal_trade(p, state_at(0.5, 2.0, 0.0, 0.3, {5.0}), 0.0) == Catch::Approx(0.0));
    CHECK(poisson_trade(p, state_at(0.5, 2.0, 0.0, 0.0, {0.0}), 1.0) == Catch::Approx(0.0));
}

TEST_CASE("hand-evaluated static trade") {
    // X = 1, D = 0, rho (T - t) = 2  =>  xi = -1/4
    auto p = martingale_params();
    auto st = state_at(0.0, 2.0 / p.rho, 1.0, 0.0, {0.0});
    CHECK(poisson_trade(p, st, 1.0) == Catch::Approx(-0.25).epsilon(1e-14));
    CHECK(optimal_trade(p, st, 1.0) == Catch::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("poisson trade equals the optimal trade when the imbalance vanishes") {
    auto p = martingale_params();
    auto st = state_at(0.3, 2.0, 2.0, -0.01, {0.0});
    CHECK(optimal_trade(p, st, 1.0) == Catch::Approx(poisson_trade(p, st, 1.0)).epsilon(1e-14));
}

TEST_CASE("trade is linear in the scaled state") {
    auto p = martingale_params();
    double s = 0.37;
    auto full = state_at(0.4, 2.0, 1.5, 0.02, {8.0, -3.0});
    // two-scale variant of the same parameters
    auto hawkes = HawkesSpec::make(20.0, {60.0, 300.0}, {0.3, 0.7}, {10.0, 45.0}, {10.0, 5.0},
                                   MarkType::volume, 500.0, 0.0025);
    auto prop = PropagatorSpec::make(1.0, {0.4}, {100.0}, 0.0, 0.0, 500.0 / 0.0025);
    auto p2 = StrategyParams::make(hawkes, prop);

    auto scaled = full;
    scaled.position *= s;
    scaled.transient *= s;
    for (double& d : scaled.deltas) d *= s;
    CHECK(optimal_trade(p2, scaled, 1.0) ==
          Catch::Approx(s * optimal_trade(p2, full, 1.0)).epsilon(1e-12));
}

TEST_CASE("s = 1 trade restores the position formula when impact is pure transient") {
    // nu = 0 (hence eps = 0) and q = 1: after the trade and its own impact on D,
    // the position equals the optimal one for any starting state
    auto hawkes = HawkesSpec::make(20.0, {100.0}, {1.0}, {10.0, 45.0}, {10.0, 5.0},
                                   MarkType::volume, 500.0, 0.0025);
    auto prop = PropagatorSpec::make(1.0, {1.0}, {100.0}, 0.0, 0.0, 1.0);
    auto p = StrategyParams::make(hawkes, prop);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        auto st = state_at(0.1 + 0.8 * std::abs(unif(rng)), 2.0, 40.0 * unif(rng),
                           0.05 * unif(rng), {30.0 * unif(rng)});
        double xi = optimal_trade(p, st, 1.0);
        auto post = st;
        post.position += xi;
        post.transient += (1.0 - p.nu) * xi / p.q;
        CHECK(post.position == Catch::Approx(optimal_position(p, post)).margin(1e-9));
    }
}

TEST_CASE("initial block trade matches the horizon-T closed form") {
    auto p = martingale_params();
    double T = 2.0, D0 = 0.01, x0 = 5.0, delta0 = 9.0;
    auto st = state_at(0.0, T, x0, D0, {delta0});
    double xi = optimal_trade(p, st, 1.0);

    // direct evaluation of the initial-jump display with scalar zeta / omega
    double x = T * p.H(0, 0);
    double zs = (1.0 - std::exp(-x)) / x;
    double ws = (std::exp(-x) - 1.0 + x) / (x * x);
    double trend = p.m1 / (2.0 * p.rho) *
                   (1.0 + p.rho * T / (2.0 + p.rho * T) * (zs + p.nu * p.rho * T * ws)) * delta0;
    double rhs = -((1.0 + p.rho * T) * p.q * D0 + x0) / (2.0 + p.rho * T) + trend;
    CHECK(xi == Catch::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("cost of non-trading vanishes on the optimal trajectory") {
    auto p = martingale_params();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        auto st = state_at(0.2 + 0.6 * std::abs(unif(rng)), 2.0, 0.0, 0.03 * unif(rng),
                           {25.0 * unif(rng)});
        st.position = optimal_position(p, st);
        CHECK(nontrading_cost(p, st) == Catch::Approx(0.0).margin(1e-12));

        // off-optimum cost grows quadratically
        auto near = st, far = st;
        near.position += 1.0;
        far.position += 2.0;
        double c1 = nontrading_cost(p, near);
        double c2 = nontrading_cost(p, far);
        CHECK(c1 > 0.0);
        CHECK(c2 / c1 == Catch::Approx(4.0).epsilon(1e-9));
    }
}

TEST_CASE("martingale construction passes the manipulation check") {
    auto hawkes = HawkesSpec::make(20.0, {100.0}, {1.0}, {10.0, 45.0}, {10.0, 5.0},
                                   MarkType::volume, 500.0, 0.0025);
    auto prop = PropagatorSpec::make(1.0, {0.4}, {100.0}, 0.0, 0.0, 500.0 / 0.0025);
    auto rep = check_pms(hawkes, prop, stationary_state(hawkes));
    CHECK(rep.classification == "martingale");
    for (double r : rep.kernel_residuals) CHECK(r == Catch::Approx(0.0).margin(1e-9));
    for (double r : rep.initial_residuals) CHECK(r == Catch::Approx(0.0).margin(1e-9));
    CHECK(rep.excitation_residual_sup == Catch::Approx(0.0).margin(1e-12));
    CHECK(rep.dbr == Catch::Approx(1.0 - prop.nu).epsilon(1e-12));
}

TEST_CASE("mean-reverting classification for the reference parameters") {
    auto hawkes = HawkesSpec::make(15.0, {60.0, 360.0}, {0.1, 0.9}, {110.5, 19.5}, {66.5, 3.5},
                                   MarkType::volume, 776.0, 0.0025);
    auto prop = PropagatorSpec::make(2.70, {0.50, 0.10}, {60.0, 360.0}, 4.0 / 3600.0, 0.10,
                                     776.0 / 0.0025);
    auto rep = check_pms(hawkes, prop, stationary_state(hawkes));
    CHECK(rep.dbr == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(rep.transient_fraction == Catch::Approx(0.60).epsilon(1e-12));
    CHECK(rep.classification == "mean-reverting");
    CHECK(rep.br == Catch::Approx(200.0 / 240.0).epsilon(1e-12));
}

TEST_CASE("grids are merged with zero-padded weights") {
    auto hawkes = HawkesSpec::make(15.0, {60.0, 360.0}, {0.1, 0.9}, {110.5, 19.5}, {66.5, 3.5},
                                   MarkType::volume, 776.0, 0.0025);
    auto prop = PropagatorSpec::make(2.0, {0.7}, {120.0}, 0.0, 0.0, 1000.0);
    auto rep = check_pms(hawkes, prop, stationary_state(hawkes));
    REQUIRE(rep.speed_grid.size() == 3);
    CHECK(rep.speed_grid[0] == 60.0);
    CHECK(rep.speed_grid[1] == 120.0);
    CHECK(rep.speed_grid[2] == 360.0);
    // at 120 only the propagator has mass: residual = -lambda rho
    CHECK(rep.kernel_residuals[1] == Catch::Approx(-0.7 * 120.0).epsilon(1e-12));
}
