#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hiercc/stoch_sim.hpp"

using namespace hiercc;

namespace {

const Dims kDims{1000, 1000, 1000};

std::vector<WorkerDraw> constant_draws(std::size_t n, double tComp, double tComm) {
    return std::vector<WorkerDraw>(n, WorkerDraw{tComp, tComm});
}

}  // namespace

TEST_CASE("draws: vanishing scale degenerates to the shift") {
    const TimingModel model{1e-30, 0.25, 1e-30, 0.5};
    for (const auto& d : sample_draws(model, 100, 1)) {
        REQUIRE(d.tComp == Catch::Approx(0.25).margin(1e-25));
        REQUIRE(d.tComm == Catch::Approx(0.5).margin(1e-25));
    }
}

TEST_CASE("draws: sample mean approaches alpha + mu") {
    const TimingModel model{2.0, 0.5, 1e-6, 0.0};
    const auto draws = sample_draws(model, 1000000, 77);
    double sum = 0;
    for (const auto& d : draws) sum += d.tComp;
    REQUIRE(sum / 1e6 == Catch::Approx(2.5).epsilon(0.003));
}

TEST_CASE("draws: empirical CDF is close to the model CDF") {
    const TimingModel model{1.0, 1.0, 1e-6, 0.0};
    const auto draws = sample_draws(model, 1000000, 1234);
    std::vector<double> xs(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) xs[i] = draws[i].tComp;
    std::sort(xs.begin(), xs.end());
    double ks = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = 1.0 - std::exp(-(xs[i] - 1.0) / 1.0);
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    REQUIRE(ks < 0.002);
}

TEST_CASE("draws are reproducible and order-independent") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const auto a = sample_draws(model, 50, 42, 7);
    const auto b = sample_draws(model, 50, 42, 7);
    for (std::size_t i = 0; i < 50; ++i) {
        REQUIRE(a[i].tComp == b[i].tComp);
        REQUIRE(a[i].tComm == b[i].tComm);
    }
    // a different trial index gives a different stream
    const auto c = sample_draws(model, 50, 42, 8);
    REQUIRE(c[0].tComp != a[0].tComp);
}

TEST_CASE("finishing_nonh: single worker and symmetric draws") {
    const GridSpec g{1, 1, 1};
    const auto one = finishing_nonh(constant_draws(1, 2e-9, 1e-9), kDims, g, 1);
    const auto loads = load_profile(g, kDims);
    REQUIRE(one.finishingTime ==
            Catch::Approx((loads.commIn + loads.commOut) * 1e-9 + loads.comp * 2e-9));

    const auto equal = finishing_nonh(constant_draws(12, 3e-9, 1e-9), kDims, {2, 1, 2}, 7);
    const auto loads2 = load_profile(GridSpec{2, 1, 2}, kDims);
    REQUIRE(equal.finishingTime ==
            Catch::Approx((loads2.commIn + loads2.commOut) * 1e-9 + loads2.comp * 3e-9));
}

TEST_CASE("finishing_bicc: P=1 reduces to nonh on every draw vector") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    for (std::size_t trial = 0; trial < 200; ++trial) {
        const auto draws = sample_draws(model, 20, 5, trial);
        const auto nonh = finishing_nonh(draws, kDims, g, 4);
        const auto bicc = finishing_bicc(draws, kDims, g, 1, 4);
        REQUIRE(bicc.finishingTime == nonh.finishingTime);
    }
}

TEST_CASE("finishing_bicc never exceeds finishing_nonh at matched budgets") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    std::size_t violations = 0;
    for (std::size_t trial = 0; trial < 10000; ++trial) {
        const auto draws = sample_draws(model, 20, 6, trial);
        const double nonh = finishing_nonh(draws, kDims, g, 4).finishingTime;
        const double bicc = finishing_bicc(draws, kDims, g, 8, 32).finishingTime;
        if (bicc > nonh) ++violations;
    }
    REQUIRE(violations == 0);
}

TEST_CASE("finishing_mlcc: L=1 reduces to nonh") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    for (std::size_t trial = 0; trial < 200; ++trial) {
        const auto draws = sample_draws(model, 20, 5, trial);
        REQUIRE(finishing_mlcc(draws, kDims, g, {4}).finishingTime ==
                Catch::Approx(finishing_nonh(draws, kDims, g, 4).finishingTime)
                    .epsilon(1e-14));
    }
}

TEST_CASE("finishing_mlcc: uniform profile with no communication equals nonh") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    const std::vector<std::size_t> uniform(6, 4);
    for (std::size_t trial = 0; trial < 200; ++trial) {
        const auto draws = sample_draws(model, 20, 5, trial);
        const double mlcc =
            finishing_mlcc(draws, kDims, g, uniform, SimDominance::MxOrMy, Regime::FastNetwork)
                .finishingTime;
        const double nonh =
            finishing_nonh(draws, kDims, g, 4, Regime::FastNetwork).finishingTime;
        REQUIRE(mlcc == Catch::Approx(nonh).epsilon(1e-12));
    }
}

TEST_CASE("finishing_mlcc: empty tail levels do not contribute slots") {
    const GridSpec g{4, 1, 1};
    const auto draws = constant_draws(10, 1e-9, 0.0);
    // {8, 4, 0, 0}: two active levels, so the last active slot index is 2
    const auto res = finishing_mlcc(draws, kDims, g, {8, 4, 0, 0}, SimDominance::MxOrMy,
                                    Regime::FastNetwork);
    const double compLevel = load_profile(g, kDims).comp / 4.0;
    REQUIRE(res.finishingTime == Catch::Approx(2.0 * compLevel * 1e-9));
    REQUIRE(res.perLevelCompletion[2] == 0.0);
}

TEST_CASE("finishing_rmlcc: L=1 reduces to nonh") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    const auto draws = sample_draws(model, 20, 5, 3);
    const auto pos = rmlcc_positions(20, 1, 5, 3);
    REQUIRE(finishing_rmlcc(draws, kDims, g, 1, 4, pos).finishingTime ==
            Catch::Approx(finishing_nonh(draws, kDims, g, 4).finishingTime).epsilon(1e-14));
}

TEST_CASE("finishing_hhcc: boundary reductions to bicc and mlcc") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    for (std::size_t trial = 0; trial < 100; ++trial) {
        const auto draws = sample_draws(model, 20, 9, trial);
        // L_H = 1, P_1 = P: a single jointly coded block
        const double asBicc =
            finishing_hhcc(draws, kDims, g, {8}, {32}, Regime::FastNetwork).finishingTime;
        const double bicc =
            finishing_bicc(draws, kDims, g, 8, 32, Regime::FastNetwork).finishingTime;
        REQUIRE(asBicc == Catch::Approx(bicc).epsilon(1e-14));

        // L_H = P, P_l = 1: one level per slot
        const std::vector<std::size_t> ones(8, 1);
        const std::vector<std::size_t> profile{8, 6, 5, 5, 4, 2, 1, 1};
        const double asMlcc =
            finishing_hhcc(draws, kDims, g, ones, profile, Regime::FastNetwork).finishingTime;
        const double mlcc = finishing_mlcc(draws, kDims, g, profile, SimDominance::MxOrMy,
                                           Regime::FastNetwork)
                                .finishingTime;
        REQUIRE(asMlcc == Catch::Approx(mlcc).epsilon(1e-14));
    }
}

TEST_CASE("finishing_hhcc: deterministic toy sits between bicc and mlcc") {
    const GridSpec g{1, 1, 2};
    const auto draws = constant_draws(3, 1e-9, 0.0);
    const double bicc =
        finishing_bicc(draws, kDims, g, 4, 8, Regime::FastNetwork).finishingTime;
    const double hhcc = finishing_hhcc(draws, kDims, g, {2, 2}, {5, 3}, Regime::FastNetwork)
                            .finishingTime;
    const double mlcc = finishing_mlcc(draws, kDims, g, {3, 3, 1, 1}, SimDominance::MxOrMy,
                                       Regime::FastNetwork)
                            .finishingTime;
    REQUIRE(bicc <= hhcc * (1 + 1e-12));
    REQUIRE(hhcc <= mlcc * (1 + 1e-12));
}

TEST_CASE("hhcc interleaves between bicc and mlcc pathwise at matched budgets") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    const std::vector<std::size_t> mlccProfile{8, 6, 5, 5, 4, 2, 1, 1};  // sums to 32
    const std::vector<std::size_t> hhccPerLevel{2, 2, 2, 2};
    const std::vector<std::size_t> hhccProfile{14, 10, 6, 2};  // pairwise sums of the above
    std::size_t violations = 0;
    for (std::size_t trial = 0; trial < 10000; ++trial) {
        const auto draws = sample_draws(model, 20, 31, trial);
        const double bicc =
            finishing_bicc(draws, kDims, g, 8, 32, Regime::FastNetwork).finishingTime;
        const double hhcc =
            finishing_hhcc(draws, kDims, g, hhccPerLevel, hhccProfile, Regime::FastNetwork)
                .finishingTime;
        const double mlcc = finishing_mlcc(draws, kDims, g, mlccProfile, SimDominance::MxOrMy,
                                           Regime::FastNetwork)
                                .finishingTime;
        if (bicc > hhcc * (1 + 1e-12) || hhcc > mlcc * (1 + 1e-12)) ++violations;
    }
    REQUIRE(violations == 0);
}

TEST_CASE("large-fleet expectation orderings at many levels") {
    // N=300, R=42, L=96: randomized level orders cannot beat the optimized
    // profile at this depth, but they do beat the naive uniform profile, and
    // the jointly coded scheme bounds everything from below.
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{42, 1, 1};
    const std::size_t n = 300, r = 42, bigL = 96, trials = 2000;
    const RegimeParams params{n, r, bigL, model.muComp, model.alphaComp, model.muComm,
                              model.alphaComm};
    const auto profile = optimize_fast_network(params).profile.thresholds;

    auto mean = [&](auto&& fn) {
        return monte_carlo(fn, trials, 404, 2).mean;
    };
    const double nonh = mean([&](std::size_t t) {
        return finishing_nonh(sample_draws(model, n, 404, t), kDims, g, r).finishingTime;
    });
    const double bicc = mean([&](std::size_t t) {
        return finishing_bicc(sample_draws(model, n, 404, t), kDims, g, bigL, bigL * r)
            .finishingTime;
    });
    const double mlccOpt = mean([&](std::size_t t) {
        return finishing_mlcc(sample_draws(model, n, 404, t), kDims, g, profile).finishingTime;
    });
    const double mlccUniform = mean([&](std::size_t t) {
        return finishing_mlcc(sample_draws(model, n, 404, t), kDims, g,
                              std::vector<std::size_t>(bigL, r))
            .finishingTime;
    });
    const double rmlcc = mean([&](std::size_t t) {
        const auto draws = sample_draws(model, n, 404, t);
        return finishing_rmlcc(draws, kDims, g, bigL, r, rmlcc_positions(n, bigL, 404, t))
            .finishingTime;
    });

    REQUIRE(bicc < mlccOpt);
    REQUIRE(mlccOpt < nonh);
    REQUIRE(mlccOpt < rmlcc);      // profile design is necessary at large L
    REQUIRE(rmlcc < mlccUniform);  // but shuffling still beats the naive profile
    REQUIRE(mlccUniform <= nonh * 1.01);
}

TEST_CASE("monte_carlo: single trial, determinism, and error scaling") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{4, 1, 1};
    auto trialFn = [&](std::size_t t) {
        return finishing_nonh(sample_draws(model, 20, 123, t), kDims, g, 4).finishingTime;
    };

    const auto one = monte_carlo(trialFn, 1, 123, 1);
    REQUIRE(one.mean == trialFn(0));

    const auto a = monte_carlo(trialFn, 5000, 123, 1);
    const auto b = monte_carlo(trialFn, 5000, 123, 2);
    REQUIRE(a.mean == b.mean);  // thread count cannot change the result
    REQUIRE(a.p95 == b.p95);

    // standard error shrinks like 1/sqrt(trials)
    const auto big = monte_carlo(trialFn, 10000, 123, 2);
    const double se1 = a.stddev / std::sqrt(5000.0);
    const double se2 = big.stddev / std::sqrt(10000.0);
    REQUIRE(se2 / se1 == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("monte_carlo mean matches the analytic fast-network form within 1%") {
    const TimingModel model{1e-6, 1e-7, 1e-8, 1e-9};
    const GridSpec g{42, 1, 1};
    const auto stats = monte_carlo(
        [&](std::size_t t) {
            return finishing_nonh(sample_draws(model, 300, 2024, t), kDims, g, 42,
                                  Regime::FastNetwork)
                .finishingTime;
        },
        100000, 2024, 2);
    const double analytic = (1e-7 + 1e-6 * harmonic_tail(300, 42)) * (1e9 / 42.0);
    REQUIRE(stats.mean == Catch::Approx(analytic).epsilon(0.01));
}

TEST_CASE("fit: degenerate samples") {
    const auto fit = fit_shifted_exponential({1.0, 1.0, 1.0});
    REQUIRE(fit.alpha == 1.0);
    REQUIRE(fit.mu == 0.0);
    REQUIRE(fit.degenerate);
    REQUIRE_THROWS_AS(fit_shifted_exponential({1.0}), std::invalid_argument);
}

TEST_CASE("fit: round trips the empirical parameter sets within 1%") {
    for (const auto& [mu, alpha] : std::vector<std::pair<double, double>>{
             {0.22, 0.99}, {0.021, 3.803}}) {
        RngStream rng(404, 0, 0);
        std::vector<double> samples(100000);
        for (auto& s : samples) s = rng.next_shifted_exponential(mu, alpha);
        const auto fit = fit_shifted_exponential(samples);
        REQUIRE(fit.mu == Catch::Approx(mu).epsilon(0.01));
        REQUIRE(fit.alpha == Catch::Approx(alpha).epsilon(0.01));
    }
}
