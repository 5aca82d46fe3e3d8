#pragma once

// shared helpers for the test suites

#include <cstddef>
#include <limits>
#include <vector>

#include "hiercc/matrix.hpp"
#include "hiercc/profile_opt.hpp"
#include "hiercc/rng.hpp"

namespace testsupport {

inline hiercc::Matrix random_matrix(std::size_t rows, std::size_t cols, hiercc::RngStream& rng) {
    hiercc::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = 2.0 * rng.next_double() - 1.0;
    return m;
}

struct BruteResult {
    std::vector<std::size_t> profile;
    double objective = std::numeric_limits<double>::infinity();
};

// Exhaustive search over nonincreasing integer profiles with entries in
// [0, N-1] summing to L*R. The per-level objective is
// (alpha + mu log(N/(N-r))) * level for the fast-network regime and the same
// without the level factor for the fast-worker regime.
inline BruteResult brute_force_profile(std::size_t n, std::size_t r, std::size_t bigL, double mu,
                                       double alpha, bool fastWorker = false) {
    const std::size_t budget = bigL * r;
    BruteResult best;
    std::vector<std::size_t> cur(bigL, 0);

    auto levelObjective = [&](std::size_t rl, std::size_t level1) {
        if (rl == 0) return 0.0;
        const double g =
            alpha + mu * std::log(static_cast<double>(n) / static_cast<double>(n - rl));
        return fastWorker ? g : g * static_cast<double>(level1);
    };

    // assign levels in order; prune on the running max objective
    auto rec = [&](auto&& self, std::size_t level, std::size_t remaining, std::size_t prev,
                   double runningMax) -> void {
        if (runningMax >= best.objective) return;
        if (level == bigL) {
            if (remaining == 0) {
                best.objective = runningMax;
                best.profile = cur;
            }
            return;
        }
        const std::size_t left = bigL - level;
        std::size_t lo = remaining > (left - 1) * prev ? remaining - (left - 1) * prev : 0;
        // each later level is capped by this one, so this level must cover
        // at least a 1/left share of what remains
        const std::size_t share = (remaining + left - 1) / left;
        lo = std::max(lo, share);
        const std::size_t hi = std::min({prev, remaining, n - 1});
        for (std::size_t rl = lo; rl <= hi; ++rl) {
            cur[level] = rl;
            self(self, level + 1, remaining - rl, rl, std::max(runningMax, levelObjective(rl, level + 1)));
            cur[level] = 0;
        }
    };
    rec(rec, 0, budget, n - 1, 0.0);
    return best;
}

}  // namespace testsupport
