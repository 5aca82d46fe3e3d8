#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hiercc/profile_opt.hpp"
#include "hiercc/rng.hpp"
#include "hiercc/stoch_sim.hpp"
#include "support.hpp"

using namespace hiercc;

TEST_CASE("expected order statistic: minimum of two unit exponentials") {
    REQUIRE(expected_order_statistic(2, 1, 1.0, 0.0) == Catch::Approx(0.5));
}

TEST_CASE("expected order statistic: harmonic sum and log form at (300, 42)") {
    const double exact = expected_order_statistic(300, 42, 1e-6, 1e-7);
    double tail = 0;
    for (int i = 259; i <= 300; ++i) tail += 1.0 / i;  // independent accumulation
    REQUIRE(exact == Catch::Approx(1e-7 + 1e-6 * tail).epsilon(1e-12));
    REQUIRE(exact == Catch::Approx(2.505e-7).epsilon(2e-3));

    const double logForm = expected_order_statistic(300, 42, 1e-6, 1e-7, true);
    REQUIRE(logForm == Catch::Approx(1e-7 + 1e-6 * std::log(300.0 / 258.0)).epsilon(1e-12));
    REQUIRE(logForm > exact);  // the log form overshoots the harmonic sum
    REQUIRE(logForm == Catch::Approx(2.508e-7).epsilon(2e-3));
}

TEST_CASE("expected order statistic rejects r >= n") {
    REQUIRE_THROWS_AS(expected_order_statistic(5, 5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("expected order statistic matches Monte Carlo") {
    const double mu = 0.7, alpha = 0.1;
    const std::size_t n = 20, r = 4, trials = 200000;
    double sum = 0;
    std::vector<double> draws(n);
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream rng(5150, t, 0);
        for (auto& d : draws) d = rng.next_shifted_exponential(mu, alpha);
        std::nth_element(draws.begin(), draws.begin() + (r - 1), draws.end());
        sum += draws[r - 1];
    }
    const double mc = sum / trials;
    REQUIRE(mc == Catch::Approx(expected_order_statistic(n, r, mu, alpha)).epsilon(0.005));
}

TEST_CASE("expected finishing time, fast-network closed form") {
    const RegimeParams p{300, 42, 1, 1e-6, 1e-7, 1e-8, 1e-9};
    const double v = expected_finishing_nonh(p, {1000, 1000, 1000}, {42, 1, 1},
                                             Regime::FastNetwork);
    const double byHand = (1e-7 + 1e-6 * std::log(300.0 / 258.0)) * (1e9 / 42.0);
    REQUIRE(v == Catch::Approx(byHand).epsilon(1e-12));

    // with r = 1 and many workers the value sits just above the shift floor
    const RegimeParams tiny{1000, 1, 1, 1e-6, 1e-7, 1e-8, 1e-9};
    const double floorsOnly = expected_finishing_nonh(tiny, {100, 100, 100}, {1, 1, 1},
                                                      Regime::FastNetwork);
    REQUIRE(floorsOnly == Catch::Approx(1e-7 * 1e6).epsilon(0.02));
}

TEST_CASE("expected finishing time, fast-worker closed form") {
    const RegimeParams p{20, 4, 1, 1e-6, 1e-7, 1e-8, 1e-9};
    const Dims d{1000, 1000, 1000};
    const GridSpec g{2, 1, 2};
    const double v = expected_finishing_nonh(p, d, g, Regime::FastWorker);
    const double commIn = 1e6 / 2 + 1e6 / 2;
    const double commOut = 1e6 / 4;
    REQUIRE(v == Catch::Approx((1e-9 + 1e-8 * std::log(20.0 / 16.0)) * (commIn + commOut))
                    .epsilon(1e-12));

    REQUIRE_THROWS_AS(expected_finishing_nonh(p, d, g, Regime::Full), std::invalid_argument);
}

TEST_CASE("fast-network optimizer: L=1 forces the base threshold") {
    const RegimeParams p{20, 4, 1, 1e-6, 1e-7, 1e-8, 1e-9};
    const auto res = optimize_fast_network(p);
    REQUIRE(res.profile.thresholds == std::vector<std::size_t>{4});
}

TEST_CASE("fast-network optimizer matches exhaustive search on sample instances") {
    for (const auto& [n, r, l] : std::vector<std::array<std::size_t, 3>>{
             {20, 4, 8}, {12, 3, 4}, {24, 10, 5}, {7, 2, 6}, {16, 8, 3}}) {
        const RegimeParams p{n, r, l, 1e-6, 1e-7, 1e-8, 1e-9};
        const auto got = optimize_fast_network(p);
        const auto want = testsupport::brute_force_profile(n, r, l, p.muComp, p.alphaComp);
        INFO("n=" << n << " r=" << r << " l=" << l);
        REQUIRE(got.objective == Catch::Approx(want.objective).epsilon(1e-9));
    }
}

TEST_CASE("fast-network optimizer output is a valid profile") {
    for (std::size_t n : {10, 20, 24})
        for (std::size_t r : {2, 4, 7})
            for (std::size_t l : {2, 5, 8}) {
                const RegimeParams p{n, r, l, 1e-6, 1e-7, 1e-8, 1e-9};
                const auto res = optimize_fast_network(p);
                REQUIRE(res.profile.thresholds.size() == l);
                std::size_t sum = 0, prev = n;
                for (auto rl : res.profile.thresholds) {
                    REQUIRE(rl <= prev);
                    REQUIRE(rl < n);
                    prev = rl;
                    sum += rl;
                }
                REQUIRE(sum == l * r);
            }
}

TEST_CASE("fast-network profile is diverse, fast-worker profile is flat") {
    const RegimeParams p{20, 4, 8, 1e-6, 1e-7, 1e-8, 1e-9};
    const auto fn = optimize_fast_network(p);
    REQUIRE(fn.profile.thresholds.front() > fn.profile.thresholds.back());

    const auto fw = optimize_fast_worker(p);
    REQUIRE(fw.profile.thresholds == std::vector<std::size_t>(8, 4));

    // the flat profile is also what exhaustive search finds for the
    // fast-worker objective
    const auto brute = testsupport::brute_force_profile(20, 4, 8, p.muComm, p.alphaComm, true);
    REQUIRE(fw.objective == Catch::Approx(brute.objective).epsilon(1e-9));
}

TEST_CASE("fast-worker optimizer: any instance returns the constant profile") {
    for (std::size_t l : {1, 3, 8}) {
        const RegimeParams p{24, 6, l, 1e-6, 1e-7, 1e-2, 1e-3};
        const auto res = optimize_fast_worker(p);
        REQUIRE(res.profile.thresholds == std::vector<std::size_t>(l, 6));
    }
}

TEST_CASE("mlcc bounds: zero width at L=1 and monotone in mu") {
    const Dims d{1000, 1000, 1000};
    const GridSpec g{4, 1, 1};
    const RegimeParams one{20, 4, 1, 1e-6, 1e-7, 1e-8, 1e-9};
    const auto b1 = mlcc_bounds(one, {{4}}, d, g);
    REQUIRE(b1.upper - b1.lower == Catch::Approx(0.0).margin(1e-15));

    const RegimeParams p{20, 4, 4, 1e-6, 1e-7, 1e-8, 1e-9};
    const RecoveryProfile prof{{8, 4, 3, 1}};
    const auto lo = mlcc_bounds(p, prof, d, g);
    RegimeParams p2 = p;
    p2.muComp *= 2;
    const auto hi = mlcc_bounds(p2, prof, d, g);
    REQUIRE(hi.lower > lo.lower);
    REQUIRE(hi.upper > lo.upper);
    REQUIRE(lo.lower <= lo.upper);
}

TEST_CASE("mlcc bounds bracket a Monte Carlo mean") {
    const Dims d{1000, 1000, 1000};
    const GridSpec g{4, 1, 1};
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const RegimeParams p{20, 4, 4, 1e-6, 1e-7, 1e-8, 1e-9};
    const RecoveryProfile prof{{8, 4, 3, 1}};
    const auto bounds = mlcc_bounds(p, prof, d, g);
    const auto stats = monte_carlo(
        [&](std::size_t t) {
            return finishing_mlcc(sample_draws(model, 20, 99, t), d, g, prof.thresholds,
                                  SimDominance::MxOrMy, Regime::FastNetwork)
                .finishingTime;
        },
        20000, 99, 2);
    const double se = stats.stddev / std::sqrt(static_cast<double>(stats.trials));
    REQUIRE(stats.mean + 3 * se >= bounds.lower);
    REQUIRE(stats.mean - 3 * se <= bounds.upper);
}
