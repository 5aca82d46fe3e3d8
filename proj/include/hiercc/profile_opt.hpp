#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hiercc/codes.hpp"
#include "hiercc/cuboid.hpp"
#include "hiercc/hierarchy.hpp"

namespace hiercc {

// Homogeneous-fleet parameters for the finishing-time analysis.
struct RegimeParams {
    std::size_t workers = 1;    // N
    std::size_t threshold = 1;  // R
    std::size_t levels = 1;     // L
    double muComp = 1e-6;       // seconds per basic op, exponential scale
    double alphaComp = 0;       // seconds per basic op, shift
    double muComm = 1e-8;       // seconds per real
    double alphaComm = 0;

    void validate() const {
        if (muComp <= 0 || muComm <= 0 || alphaComp < 0 || alphaComm < 0)
            throw std::invalid_argument("timing parameters: mu > 0 and alpha >= 0 required");
        if (threshold < 1 || threshold >= workers)
            throw std::invalid_argument("need 1 <= R < N");
        if (levels < 1) throw std::invalid_argument("need L >= 1");
    }
};

enum class Regime { Full, FastNetwork, FastWorker };

inline Regime regime_from_string(const std::string& s) {
    if (s == "full") return Regime::Full;
    if (s == "fast-network") return Regime::FastNetwork;
    if (s == "fast-worker") return Regime::FastWorker;
    throw std::invalid_argument("unknown regime: " + s);
}

// sum_{i=n-r+1}^{n} 1/i
inline double harmonic_tail(std::size_t n, std::size_t r) {
    double s = 0;
    for (std::size_t i = n - r + 1; i <= n; ++i) s += 1.0 / static_cast<double>(i);
    return s;
}

// E[T_(r:n)] of n iid shifted exponentials: alpha + mu * sum_{i=n-r+1}^n 1/i,
// or the log(n/(n-r)) approximation on request.
inline double expected_order_statistic(std::size_t n, std::size_t r, double mu, double alpha,
                                       bool logApprox = false) {
    if (r < 1 || r >= n)
        throw std::invalid_argument("expected_order_statistic: need 1 <= r < n");
    if (logApprox)
        return alpha + mu * std::log(static_cast<double>(n) / static_cast<double>(n - r));
    return alpha + mu * harmonic_tail(n, r);
}

// Regime-specific closed form for the non-hierarchical expected finishing
// time (the log-approximate order statistic times the dominating load).
inline double expected_finishing_nonh(const RegimeParams& p, const Dims& d, const GridSpec& g,
                                      Regime regime) {
    p.validate();
    const auto loads = load_profile(g, d);
    const double n = static_cast<double>(p.workers);
    const double logTerm = std::log(n / (n - static_cast<double>(p.threshold)));
    switch (regime) {
        case Regime::FastNetwork:
            return (p.alphaComp + p.muComp * logTerm) * loads.comp;
        case Regime::FastWorker:
            return (p.alphaComm + p.muComm * logTerm) * (loads.commIn + loads.commOut);
        case Regime::Full:
            throw std::invalid_argument("closed form exists for the extreme regimes only");
    }
    throw std::invalid_argument("unknown regime");
}

struct ProfileResult {
    RecoveryProfile profile;
    double objective = 0;
};

namespace detail {

// fast-network per-level objective (alpha + mu log(N/(N-r))) * level, with
// level 1-based; empty levels carry no term.
inline double fn_level_objective(std::size_t n, std::size_t r, double mu, double alpha,
                                 std::size_t level1) {
    if (r == 0) return 0.0;
    if (r >= n) return std::numeric_limits<double>::infinity();
    return (alpha + mu * std::log(static_cast<double>(n) / static_cast<double>(n - r))) *
           static_cast<double>(level1);
}

inline double fn_objective(const std::vector<std::size_t>& profile, std::size_t n, double mu,
                           double alpha) {
    double z = 0;
    for (std::size_t l = 0; l < profile.size(); ++l)
        z = std::max(z, fn_level_objective(n, profile[l], mu, alpha, l + 1));
    return z;
}

// Largest integer r <= N-1 whose level objective stays within z.
inline std::size_t fn_level_cap(std::size_t n, double mu, double alpha, std::size_t level1,
                                double z) {
    const double perLevel = z / static_cast<double>(level1);
    if (perLevel <= alpha) return 0;
    const double frac =
        static_cast<double>(n) * (1.0 - std::exp(-(perLevel - alpha) / mu));
    auto cap = static_cast<std::size_t>(std::floor(frac + 1e-12));
    return std::min(cap, n - 1);
}

}  // namespace detail

// Min-max recovery-profile design for the fast-network regime: minimize
// max_l (alpha + mu log(N/(N-r_l))) * l subject to a nonincreasing profile
// summing to L*R. Bisection on the auxiliary bound z with the max-feasible
// per-level thresholds as the feasibility oracle, then an exact pass over the
// attainable objective breakpoints so the integer profile is optimal.
inline ProfileResult optimize_fast_network(const RegimeParams& p) {
    p.validate();
    const std::size_t n = p.workers, bigL = p.levels, budget = bigL * p.threshold;
    const double mu = p.muComp, alpha = p.alphaComp;

    auto capsSum = [&](double z) {
        std::size_t s = 0;
        for (std::size_t l = 1; l <= bigL; ++l) s += detail::fn_level_cap(n, mu, alpha, l, z);
        return s;
    };

    // bracket, then bisect the real relaxation to 1e-12 absolute
    double lo = 0, hi = detail::fn_level_objective(n, p.threshold, mu, alpha, 1);
    while (capsSum(hi) < budget) hi *= 2;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (capsSum(mid) >= budget ? hi : lo) = mid;
    }

    // exact integer optimum: the optimal bound is one of the per-level
    // objectives f_l(r); search the breakpoints at or above the relaxation
    std::vector<double> candidates;
    for (std::size_t l = 1; l <= bigL; ++l)
        for (std::size_t r = 1; r <= n - 1; ++r) {
            const double f = detail::fn_level_objective(n, r, mu, alpha, l);
            if (f >= lo - 1e-9 * std::abs(lo)) candidates.push_back(f);
        }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::size_t cl = 0, ch = candidates.size() - 1;
    if (capsSum(candidates[ch]) < budget)
        throw std::invalid_argument("optimize_fast_network: infeasible budget");
    while (cl < ch) {
        const std::size_t mid = (cl + ch) / 2;
        if (capsSum(candidates[mid]) >= budget)
            ch = mid;
        else
            cl = mid + 1;
    }
    const double zstar = candidates[cl];

    // construct the profile: per-level caps at z*, then trim the excess from
    // the tail so the sum lands exactly on the budget
    std::vector<std::size_t> profile(bigL);
    std::size_t total = 0;
    for (std::size_t l = 1; l <= bigL; ++l) {
        profile[l - 1] = detail::fn_level_cap(n, mu, alpha, l, zstar);
        total += profile[l - 1];
    }
    std::size_t excess = total - budget;
    for (std::size_t l = bigL; l-- > 0 && excess > 0;) {
        const std::size_t cut = std::min(excess, profile[l]);
        profile[l] -= cut;
        excess -= cut;
    }

    ProfileResult res;
    res.profile.thresholds = std::move(profile);
    res.objective = detail::fn_objective(res.profile.thresholds, n, mu, alpha);
    return res;
}

// Fast-worker regime: the constant profile is the unique optimum.
inline ProfileResult optimize_fast_worker(const RegimeParams& p) {
    p.validate();
    ProfileResult res;
    res.profile.thresholds.assign(p.levels, p.threshold);
    res.objective = p.alphaComm + p.muComm * std::log(static_cast<double>(p.workers) /
                                                      static_cast<double>(p.workers - p.threshold));
    return res;
}

struct MlccBounds {
    double lower = 0;
    double upper = 0;
};

// Bracket on the expected multilevel finishing time in the fast-network
// regime. Lower: the largest per-level expected completion. Upper: adds the
// max-of-correlated-variables radical over the per-level variances.
inline MlccBounds mlcc_bounds(const RegimeParams& p, const RecoveryProfile& profile,
                              const Dims& d, const GridSpec& g) {
    p.validate();
    if (profile.thresholds.size() != p.levels)
        throw std::invalid_argument("mlcc_bounds: profile length != L");
    const double coef = load_profile(g, d).comp / static_cast<double>(p.levels);

    double lower = 0;
    for (std::size_t l = 0; l < p.levels; ++l)
        lower = std::max(lower, detail::fn_level_objective(p.workers, profile.thresholds[l],
                                                           p.muComp, p.alphaComp, l + 1));
    lower *= coef;

    double sumJ2 = 0;
    for (std::size_t j = 1; j <= p.levels; ++j) sumJ2 += static_cast<double>(j) * j;
    double sumInv2 = 0;
    for (std::size_t i = 1; i <= p.workers; ++i)
        sumInv2 += 1.0 / (static_cast<double>(i) * static_cast<double>(i));
    const double lfrac = (static_cast<double>(p.levels) - 1.0) / static_cast<double>(p.levels);
    const double radical = p.muComp * std::sqrt(lfrac * sumJ2 * sumInv2);

    return {lower, lower + radical * coef};
}

}  // namespace hiercc
