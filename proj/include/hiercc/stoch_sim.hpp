#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hiercc/codes.hpp"
#include "hiercc/cuboid.hpp"
#include "hiercc/profile_opt.hpp"
#include "hiercc/rng.hpp"

namespace hiercc {

// Shifted-exponential unit times: seconds per basic op (comp) and seconds
// per real (comm). Workers make linear progress at their drawn rates.
struct TimingModel {
    double muComp = 1e-6;
    double alphaComp = 0;
    double muComm = 1e-8;
    double alphaComm = 0;

    void validate() const {
        if (muComp <= 0 || muComm <= 0 || alphaComp < 0 || alphaComm < 0)
            throw std::invalid_argument("timing model: mu > 0 and alpha >= 0 required");
    }
};

struct WorkerDraw {
    double tComp = 0;  // seconds per basic op
    double tComm = 0;  // seconds per real
};

struct TrialResult {
    double finishingTime = 0;
    std::vector<double> perLevelCompletion;
    std::vector<std::size_t> completingWorkers;
};

// One stream per (trial, worker); draws never depend on evaluation order.
inline std::vector<WorkerDraw> sample_draws(const TimingModel& model, std::size_t n,
                                            std::uint64_t seed, std::uint64_t trial = 0) {
    model.validate();
    if (n == 0) throw std::invalid_argument("need at least one worker");
    std::vector<WorkerDraw> draws(n);
    for (std::size_t w = 0; w < n; ++w) {
        RngStream rng(seed, trial, w);
        draws[w].tComp = rng.next_shifted_exponential(model.muComp, model.alphaComp);
        draws[w].tComm = rng.next_shifted_exponential(model.muComm, model.alphaComm);
    }
    return draws;
}

namespace detail {

struct RegimeMask {
    double comm = 1.0;
    double comp = 1.0;

    explicit RegimeMask(Regime r)
        : comm(r == Regime::FastNetwork ? 0.0 : 1.0), comp(r == Regime::FastWorker ? 0.0 : 1.0) {}
};

// value of the r-th smallest element (1-based) plus the indices of the r
// smallest, via an index sort
inline double kth_smallest(std::vector<double>& v, std::size_t r) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(r - 1), v.end());
    return v[r - 1];
}

}  // namespace detail

// Non-hierarchical: sort the combined per-worker totals and take the R-th.
// This is the order statistic of the weighted sum, not a weighted sum of
// order statistics.
inline TrialResult finishing_nonh(const std::vector<WorkerDraw>& draws, const Dims& d,
                                  const GridSpec& g, std::size_t r,
                                  Regime regime = Regime::Full) {
    const std::size_t n = draws.size();
    if (r < 1 || r > n) throw std::invalid_argument("finishing_nonh: need 1 <= r <= N");
    const auto loads = load_profile(g, d);
    const detail::RegimeMask mask(regime);
    std::vector<std::pair<double, std::size_t>> totals(n);
    for (std::size_t w = 0; w < n; ++w) {
        const double t = mask.comm * (loads.commIn + loads.commOut) * draws[w].tComm +
                         mask.comp * loads.comp * draws[w].tComp;
        totals[w] = {t, w};
    }
    std::nth_element(totals.begin(), totals.begin() + static_cast<std::ptrdiff_t>(r - 1),
                     totals.end());
    TrialResult res;
    res.finishingTime = totals[r - 1].first;
    res.perLevelCompletion = {res.finishingTime};
    res.completingWorkers.reserve(r);
    for (std::size_t i = 0; i < r; ++i) res.completingWorkers.push_back(totals[i].second);
    std::sort(res.completingWorkers.begin(), res.completingWorkers.end());
    return res;
}

// Bit-interleaved: the N*P sequence of per-subtask completion times, input
// paid once per worker, compute linear in the slot index; take the rBicc-th.
inline TrialResult finishing_bicc(const std::vector<WorkerDraw>& draws, const Dims& d,
                                  const GridSpec& g, std::size_t p, std::size_t rBicc,
                                  Regime regime = Regime::Full) {
    const std::size_t n = draws.size();
    if (p < 1 || rBicc < 1 || rBicc > n * p)
        throw std::invalid_argument("finishing_bicc: need 1 <= rBicc <= N*P");
    const auto loads = load_profile(g, d);
    const double compSlot = loads.comp / static_cast<double>(p);
    const detail::RegimeMask mask(regime);
    std::vector<double> completions;
    completions.reserve(n * p);
    for (std::size_t w = 0; w < n; ++w) {
        const double comm =
            mask.comm * (loads.commIn + loads.commOut) * draws[w].tComm;
        const double perSlot = mask.comp * compSlot * draws[w].tComp;
        for (std::size_t k = 1; k <= p; ++k)
            completions.push_back(comm + static_cast<double>(k) * perSlot);
    }
    TrialResult res;
    res.finishingTime = detail::kth_smallest(completions, rBicc);
    res.perLevelCompletion = {res.finishingTime};
    return res;
}

enum class SimDominance { MxOrMy, Mz };

// Multilevel: per level, the per-worker completion is input (amortized) plus
// that level's output plus the cumulative compute through its slot; the level
// completes at its r_l-th order statistic and the job at the slowest level.
inline TrialResult finishing_mlcc(const std::vector<WorkerDraw>& draws, const Dims& d,
                                  const GridSpec& g, const std::vector<std::size_t>& profile,
                                  SimDominance dominance = SimDominance::MxOrMy,
                                  Regime regime = Regime::Full) {
    const std::size_t n = draws.size();
    const std::size_t bigL = profile.size();
    if (bigL == 0) throw std::invalid_argument("finishing_mlcc: empty profile");
    const auto loads = load_profile(g, d);
    const double compLevel = loads.comp / static_cast<double>(bigL);
    const double commOut = dominance == SimDominance::Mz
                               ? loads.commOut
                               : loads.commOut / static_cast<double>(bigL);
    const detail::RegimeMask mask(regime);

    TrialResult res;
    res.perLevelCompletion.assign(bigL, 0.0);
    std::vector<double> values(n);
    std::size_t slot = 0;
    for (std::size_t l = 0; l < bigL; ++l) {
        const std::size_t r = profile[l];
        if (r == 0) continue;  // empty level completes immediately
        if (r > n) throw std::invalid_argument("finishing_mlcc: r_l exceeds N");
        ++slot;
        for (std::size_t w = 0; w < n; ++w)
            values[w] = mask.comm * (loads.commIn + commOut) * draws[w].tComm +
                        mask.comp * static_cast<double>(slot) * compLevel * draws[w].tComp;
        const double done = detail::kth_smallest(values, r);
        res.perLevelCompletion[l] = done;
        res.finishingTime = std::max(res.finishingTime, done);
    }
    return res;
}

// Randomized multilevel: level l sits at position perm_w(l) in worker w's
// sequence; every level keeps threshold r.
inline TrialResult finishing_rmlcc(const std::vector<WorkerDraw>& draws, const Dims& d,
                                   const GridSpec& g, std::size_t bigL, std::size_t r,
                                   const std::vector<std::vector<std::size_t>>& positions,
                                   Regime regime = Regime::Full) {
    const std::size_t n = draws.size();
    if (positions.size() != n)
        throw std::invalid_argument("finishing_rmlcc: one position map per worker");
    if (r < 1 || r > n) throw std::invalid_argument("finishing_rmlcc: need 1 <= r <= N");
    const auto loads = load_profile(g, d);
    const double compLevel = loads.comp / static_cast<double>(bigL);
    const double commOut = loads.commOut / static_cast<double>(bigL);
    const detail::RegimeMask mask(regime);

    TrialResult res;
    res.perLevelCompletion.assign(bigL, 0.0);
    std::vector<double> values(n);
    for (std::size_t l = 0; l < bigL; ++l) {
        for (std::size_t w = 0; w < n; ++w) {
            const double pos = static_cast<double>(positions[w].at(l) + 1);
            values[w] = mask.comm * (loads.commIn + commOut) * draws[w].tComm +
                        mask.comp * pos * compLevel * draws[w].tComp;
        }
        const double done = detail::kth_smallest(values, r);
        res.perLevelCompletion[l] = done;
        res.finishingTime = std::max(res.finishingTime, done);
    }
    return res;
}

// Uniform random per-worker level orders for one trial, as position maps
// (positions[w][level] = slot index).
inline std::vector<std::vector<std::size_t>> rmlcc_positions(std::size_t n, std::size_t bigL,
                                                             std::uint64_t seed,
                                                             std::uint64_t trial = 0) {
    std::vector<std::vector<std::size_t>> pos(n, std::vector<std::size_t>(bigL));
    for (std::size_t w = 0; w < n; ++w) {
        RngStream rng(seed, trial ^ 0x524d4c43ULL, w);
        const auto perm = rng.next_permutation_of(bigL);
        for (std::size_t s = 0; s < bigL; ++s) pos[w][perm[s]] = s;
    }
    return pos;
}

// Hybrid: level l is a block of P_l consecutive slots; slot k of worker w
// finishes compute at k * (comp/P) * tComp(w); the level completes at its
// r_l-th order statistic over its N*P_l slot times.
inline TrialResult finishing_hhcc(const std::vector<WorkerDraw>& draws, const Dims& d,
                                  const GridSpec& g, const std::vector<std::size_t>& perLevel,
                                  const std::vector<std::size_t>& profile,
                                  Regime regime = Regime::Full) {
    const std::size_t n = draws.size();
    const std::size_t bigL = profile.size();
    if (perLevel.size() != bigL)
        throw std::invalid_argument("finishing_hhcc: per-level lists must match");
    std::size_t p = 0;
    for (auto pl : perLevel) p += pl;
    if (p == 0) throw std::invalid_argument("finishing_hhcc: P must be positive");
    const auto loads = load_profile(g, d);
    const double compSlot = loads.comp / static_cast<double>(p);
    const double commOut = loads.commOut / static_cast<double>(bigL);
    const detail::RegimeMask mask(regime);

    TrialResult res;
    res.perLevelCompletion.assign(bigL, 0.0);
    std::vector<double> values;
    std::size_t slotBase = 0;
    for (std::size_t l = 0; l < bigL; ++l) {
        const std::size_t r = profile[l];
        if (perLevel[l] * n < r)
            throw std::invalid_argument("finishing_hhcc: level block length below threshold");
        values.clear();
        values.reserve(n * perLevel[l]);
        for (std::size_t w = 0; w < n; ++w) {
            const double comm = mask.comm * (loads.commIn + commOut) * draws[w].tComm;
            for (std::size_t s = 1; s <= perLevel[l]; ++s)
                values.push_back(comm + mask.comp * static_cast<double>(slotBase + s) * compSlot *
                                            draws[w].tComp);
        }
        slotBase += perLevel[l];
        if (r == 0) continue;
        const double done = detail::kth_smallest(values, r);
        res.perLevelCompletion[l] = done;
        res.finishingTime = std::max(res.finishingTime, done);
    }
    return res;
}

struct MonteCarloStats {
    double mean = 0;
    double stddev = 0;
    double p50 = 0;
    double p95 = 0;
    double p99 = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

// Deterministic Monte Carlo driver: trial i's value depends only on (seed, i),
// never on thread count or execution order.
inline MonteCarloStats monte_carlo(const std::function<double(std::size_t)>& trialFn,
                                   std::size_t trials, std::uint64_t seed,
                                   std::size_t threads = 0) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, trials);

    std::vector<double> values(trials);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < trials; i += threads) values[i] = trialFn(i);
        });
    for (auto& th : pool) th.join();

    MonteCarloStats stats;
    stats.trials = trials;
    stats.seed = seed;
    double sum = 0;
    for (double v : values) sum += v;
    stats.mean = sum / static_cast<double>(trials);
    double ss = 0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(trials - 1));
        return values[idx];
    };
    stats.p50 = quantile(0.50);
    stats.p95 = quantile(0.95);
    stats.p99 = quantile(0.99);
    return stats;
}

struct ShiftedExponentialFit {
    double mu = 0;
    double alpha = 0;
    bool degenerate = false;
};

// ML estimates for the shifted exponential: alpha-hat = min, mu-hat = mean - min.
inline ShiftedExponentialFit fit_shifted_exponential(const std::vector<double>& samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("fit needs at least two samples");
    const double mn = *std::min_element(samples.begin(), samples.end());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                        static_cast<double>(samples.size());
    ShiftedExponentialFit fit;
    fit.alpha = mn;
    fit.mu = mean - mn;
    fit.degenerate = fit.mu == 0.0;
    return fit;
}

}  // namespace hiercc
