#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hiercc/codes.hpp"
#include "hiercc/cuboid.hpp"
#include "hiercc/matrix.hpp"
#include "hiercc/rng.hpp"

namespace hiercc {

enum class HierarchyMode { NonH, BICC, MLCC, RMLCC, HHCC };

inline const char* to_string(HierarchyMode m) {
    switch (m) {
        case HierarchyMode::NonH: return "nonh";
        case HierarchyMode::BICC: return "bicc";
        case HierarchyMode::MLCC: return "mlcc";
        case HierarchyMode::RMLCC: return "rmlcc";
        case HierarchyMode::HHCC: return "hhcc";
    }
    return "?";
}

inline HierarchyMode hierarchy_mode_from_string(const std::string& s) {
    if (s == "nonh" || s == "non-h") return HierarchyMode::NonH;
    if (s == "bicc") return HierarchyMode::BICC;
    if (s == "mlcc") return HierarchyMode::MLCC;
    if (s == "rmlcc") return HierarchyMode::RMLCC;
    if (s == "hhcc") return HierarchyMode::HHCC;
    throw std::invalid_argument("unknown hierarchy mode: " + s);
}

// Per-level recovery thresholds, nonincreasing in the level index. A zero
// threshold marks a level that carries no information (the optimizer can
// produce such tails at large L).
struct RecoveryProfile {
    std::vector<std::size_t> thresholds;

    std::size_t sum() const {
        std::size_t s = 0;
        for (auto r : thresholds) s += r;
        return s;
    }

    void validate(std::size_t blockLength) const {
        if (thresholds.empty()) throw std::invalid_argument("recovery profile is empty");
        for (std::size_t l = 0; l < thresholds.size(); ++l) {
            if (l > 0 && thresholds[l] > thresholds[l - 1])
                throw std::invalid_argument("recovery profile must be nonincreasing");
            if (thresholds[l] > blockLength)
                throw std::invalid_argument("recovery threshold exceeds block length at level " +
                                            std::to_string(l + 1));
        }
    }
};

struct ScheduledTask {
    std::size_t level = 0;  // 0-based level index
    std::size_t slot = 0;   // 0-based position in the worker's sequence
    EncodedTask task;
};

struct WorkerSchedule {
    std::size_t worker = 0;
    std::vector<ScheduledTask> subtasks;
};

// Uncovered slab along one axis, computed directly by the master.
struct ResidualRegion {
    bool present = false;
    Axis axis = Axis::Y;
    IndexRange range;
};

struct LevelCode {
    bool active = false;
    EncodedBatch batch;
    TaskBlock block;
    std::size_t threshold = 0;       // achieved recovery threshold
    std::size_t slotsPerWorker = 0;  // P_l
};

enum class MlccDominance { Mx, My, Mz };

// Levels of a multilevel build either follow a dominance layout (slabs along
// the dominant axis, one encoded factor shared across levels) or tile a
// uniform cell grid claimed column by column.
struct MlccLayout {
    std::optional<MlccDominance> dominance;
    std::size_t packedGx = 0, packedGy = 0;

    static MlccLayout dominated(MlccDominance d) { return {d, 0, 0}; }
    static MlccLayout packed(std::size_t gx, std::size_t gy) { return {std::nullopt, gx, gy}; }
};

struct BaseCode {
    CodeFamily family = CodeFamily::Polynomial;
    GridSpec grid;
    PointKind points = PointKind::Chebyshev;
};

struct HierarchySpec {
    HierarchyMode mode = HierarchyMode::NonH;
    std::size_t workers = 0;
    std::size_t subtasksPerWorker = 1;  // P
    Dims dims;
    BaseCode base;
    std::size_t baseThreshold = 0;
    std::vector<std::size_t> profile;  // achieved thresholds, one per level
    std::vector<LevelCode> levels;     // one per level; inactive where r_l == 0
    ResidualRegion residual;
    std::vector<WorkerSchedule> schedules;
};

namespace detail {

inline void check_budget(std::size_t achieved, std::size_t slots, std::size_t baseR,
                         const char* what) {
    const std::size_t target = slots * baseR;
    const std::size_t diff = achieved > target ? achieved - target : target - achieved;
    if (diff > slots)
        throw std::invalid_argument(std::string(what) + ": recovery budget " +
                                    std::to_string(achieved) + " is not within " +
                                    std::to_string(slots) + " of " + std::to_string(target));
}

inline Matrix block_of(const Matrix& m, const IndexRange& rows, const IndexRange& cols) {
    return extract_block(m, {rows, cols});
}

}  // namespace detail

// One encoded task per worker; profile [R].
inline HierarchySpec build_nonh(const BaseCode& base, const Matrix& a, const Matrix& b,
                                std::size_t workers) {
    HierarchySpec spec;
    spec.mode = HierarchyMode::NonH;
    spec.workers = workers;
    spec.subtasksPerWorker = 1;
    spec.dims = {a.rows(), a.cols(), b.cols()};
    spec.base = base;
    spec.baseThreshold = recovery_threshold(base.family, base.grid, workers);
    if (workers < spec.baseThreshold)
        throw std::invalid_argument("nonh: fewer workers than the recovery threshold");

    LevelCode lc;
    lc.active = true;
    lc.batch = encode(base.family, a, b, base.grid, evaluation_points(workers, base.points));
    lc.block = TaskBlock{0, {0, spec.dims.nx}, {0, spec.dims.nz}, {0, spec.dims.ny}, base.grid};
    lc.threshold = lc.batch.spec.recoveryThreshold;
    lc.slotsPerWorker = 1;
    spec.profile = {lc.threshold};
    for (std::size_t w = 0; w < workers; ++w)
        spec.schedules.push_back({w, {{0, 0, lc.batch.tasks[w]}}});
    spec.levels.push_back(std::move(lc));
    return spec;
}

// Single code across all P subtasks of all workers. The base grid is expanded
// along the axis that keeps the family valid (y for polynomial, z for
// matdot), so the expanded code's own threshold is the recovery rule.
inline HierarchySpec build_bicc(const BaseCode& base, const Matrix& a, const Matrix& b,
                                std::size_t p, std::size_t workers) {
    if (p == 0) throw std::invalid_argument("bicc: P must be positive");
    GridSpec expanded = base.grid;
    switch (base.family) {
        case CodeFamily::Polynomial: expanded.my *= p; break;
        case CodeFamily::MatDot: expanded.mz *= p; break;
        default:
            throw std::invalid_argument("bicc: only polynomial and matdot bases are encodable");
    }
    HierarchySpec spec;
    spec.mode = HierarchyMode::BICC;
    spec.workers = workers;
    spec.subtasksPerWorker = p;
    spec.dims = {a.rows(), a.cols(), b.cols()};
    spec.base = base;
    spec.baseThreshold = recovery_threshold(base.family, base.grid);

    LevelCode lc;
    lc.active = true;
    lc.batch = encode(base.family, a, b, expanded,
                      evaluation_points(workers * p, base.points));
    lc.block = TaskBlock{0, {0, spec.dims.nx}, {0, spec.dims.nz}, {0, spec.dims.ny}, expanded};
    lc.threshold = lc.batch.spec.recoveryThreshold;
    lc.slotsPerWorker = p;
    detail::check_budget(lc.threshold, p, spec.baseThreshold, "bicc");
    if (workers * p < lc.threshold)
        throw std::invalid_argument("bicc: not enough subtasks to recover");

    spec.profile = {lc.threshold};
    for (std::size_t w = 0; w < workers; ++w) {
        WorkerSchedule ws{w, {}};
        for (std::size_t s = 0; s < p; ++s)
            ws.subtasks.push_back({0, s, lc.batch.tasks[w * p + s]});
        spec.schedules.push_back(std::move(ws));
    }
    spec.levels.push_back(std::move(lc));
    return spec;
}

// L independently coded levels, one subtask per worker per level. The level
// geometry follows the layout; the per-level information dimension is chosen
// so the level's own threshold meets the profile (exactly for polynomial,
// rounded up to the next odd-threshold grid for matdot).
inline HierarchySpec build_mlcc(const BaseCode& base, const Matrix& a, const Matrix& b,
                                std::size_t nlevels, const RecoveryProfile& profile,
                                const MlccLayout& layout, std::size_t workers) {
    if (profile.thresholds.size() != nlevels)
        throw std::invalid_argument("mlcc: profile length != L");
    profile.validate(workers);

    HierarchySpec spec;
    spec.mode = HierarchyMode::MLCC;
    spec.workers = workers;
    spec.subtasksPerWorker = nlevels;
    spec.dims = {a.rows(), a.cols(), b.cols()};
    spec.base = base;
    spec.baseThreshold = recovery_threshold(base.family, base.grid);

    // per-level grids and achieved thresholds
    std::vector<LevelShape> shapes(nlevels);
    std::vector<std::size_t> achieved(nlevels, 0);
    for (std::size_t l = 0; l < nlevels; ++l) {
        const std::size_t r = profile.thresholds[l];
        if (r == 0) {
            shapes[l] = {0, 0, {1, 1, 1}};
            shapes[l].d = 0;
            continue;
        }
        GridSpec g;
        if (base.family == CodeFamily::Polynomial) {
            if (!layout.dominance) {
                g = {r, 1, 1};  // packed layout replaces this with the box shape
            } else if (*layout.dominance == MlccDominance::Mx) {
                if (r % base.grid.my != 0)
                    throw std::invalid_argument("mlcc: r_l not divisible by My at level " +
                                                std::to_string(l + 1));
                g = {r / base.grid.my, 1, base.grid.my};
            } else if (*layout.dominance == MlccDominance::My) {
                if (r % base.grid.mx != 0)
                    throw std::invalid_argument("mlcc: r_l not divisible by Mx at level " +
                                                std::to_string(l + 1));
                g = {base.grid.mx, 1, r / base.grid.mx};
            } else {
                throw std::invalid_argument("mlcc: polynomial bases are Mx- or My-dominated");
            }
            achieved[l] = r;
        } else if (base.family == CodeFamily::MatDot) {
            if (layout.dominance && *layout.dominance != MlccDominance::Mz)
                throw std::invalid_argument("mlcc: matdot bases are Mz-dominated");
            const std::size_t mz = (r + 2) / 2;  // smallest grid with 2mz-1 >= r
            g = {1, mz, 1};
            achieved[l] = 2 * mz - 1;
        } else {
            throw std::invalid_argument("mlcc: only polynomial and matdot bases are encodable");
        }
        shapes[l] = {g.info_dim(), achieved[l], g};
    }

    // geometry
    std::size_t dSum = 0;
    for (const auto& s : shapes) dSum += s.d;
    LayeredPartition part;
    Axis axis = Axis::Y;
    if (layout.dominance) {
        axis = *layout.dominance == MlccDominance::Mx   ? Axis::X
               : *layout.dominance == MlccDominance::My ? Axis::Y
                                                        : Axis::Z;
        part = layered_partition_axis(spec.dims, shapes, dSum, axis);
    } else {
        if (base.family != CodeFamily::Polynomial)
            throw std::invalid_argument("mlcc: packed layout requires a polynomial base");
        std::vector<std::size_t> cells(nlevels);
        for (std::size_t l = 0; l < nlevels; ++l) cells[l] = shapes[l].d;
        part = packed_partition(spec.dims, layout.packedGx, layout.packedGy, cells);
    }

    for (std::size_t l = 0; l < nlevels; ++l)
        detail::check_budget(achieved[l], 1, profile.thresholds[l], "mlcc level");
    std::size_t achievedSum = 0;
    for (auto r : achieved) achievedSum += r;
    detail::check_budget(achievedSum, nlevels, spec.baseThreshold, "mlcc");

    const auto points = evaluation_points(workers, base.points);
    const PolyOrientation orient =
        layout.dominance && *layout.dominance == MlccDominance::Mx ? PolyOrientation::BMinor
                                                                   : PolyOrientation::AMinor;

    spec.levels.assign(nlevels, LevelCode{});
    spec.profile = achieved;
    for (const auto& tb : part.taskBlocks) {
        const std::size_t l = tb.level;
        const Matrix ablk = detail::block_of(a, tb.x, tb.z);
        const Matrix bblk = detail::block_of(b, tb.z, tb.y);
        LevelCode lc;
        lc.active = true;
        lc.block = tb;
        if (base.family == CodeFamily::Polynomial) {
            GridSpec g = tb.grid;
            if (layout.dominance) g = shapes[l].grid;
            if (recovery_threshold(CodeFamily::Polynomial, g) != achieved[l])
                throw std::invalid_argument("mlcc: level grid does not meet its threshold");
            lc.batch = encode_polynomial(ablk, bblk, g, points, orient);
        } else {
            lc.batch = encode_matdot(ablk, bblk, shapes[l].grid.mz, points);
        }
        lc.threshold = achieved[l];
        lc.slotsPerWorker = 1;
        spec.levels[l] = std::move(lc);
    }

    // dominance layouts keep one factor identical across levels; share it
    if (layout.dominance && *layout.dominance != MlccDominance::Mz) {
        const bool shareB = *layout.dominance == MlccDominance::Mx;
        LevelCode* first = nullptr;
        for (auto& lc : spec.levels) {
            if (!lc.active) continue;
            if (!first) {
                first = &lc;
                continue;
            }
            for (std::size_t t = 0; t < lc.batch.tasks.size(); ++t) {
                if (shareB)
                    lc.batch.tasks[t].bHat = first->batch.tasks[t].bHat;
                else
                    lc.batch.tasks[t].aHat = first->batch.tasks[t].aHat;
            }
        }
    }

    if (part.residual > 0) {
        std::size_t covered = 0;
        for (const auto& tb : part.taskBlocks)
            covered = std::max(covered, (axis == Axis::X   ? tb.x
                                         : axis == Axis::Z ? tb.z
                                                           : tb.y)
                                            .hi);
        const std::size_t extent = axis == Axis::X   ? spec.dims.nx
                                   : axis == Axis::Z ? spec.dims.nz
                                                     : spec.dims.ny;
        spec.residual = {true, axis, {covered, extent}};
    }

    for (std::size_t w = 0; w < workers; ++w) {
        WorkerSchedule ws{w, {}};
        std::size_t slot = 0;
        for (std::size_t l = 0; l < nlevels; ++l)
            if (spec.levels[l].active)
                ws.subtasks.push_back({l, slot++, spec.levels[l].batch.tasks[w]});
        spec.schedules.push_back(std::move(ws));
    }
    return spec;
}

// MLCC with each worker walking the levels in an independent uniform random
// order. Requires a uniform profile; every level keeps threshold R.
inline HierarchySpec build_rmlcc(HierarchySpec mlcc, std::uint64_t seed) {
    if (mlcc.mode != HierarchyMode::MLCC)
        throw std::invalid_argument("rmlcc: input must be an MLCC build");
    for (auto r : mlcc.profile)
        if (r != mlcc.profile.front())
            throw std::invalid_argument("rmlcc: profile must be uniform");
    mlcc.mode = HierarchyMode::RMLCC;
    for (auto& ws : mlcc.schedules) {
        RngStream rng(seed, 0x524d4c43ULL, ws.worker);  // one stream per worker
        const auto perm = rng.next_permutation_of(ws.subtasks.size());
        std::vector<ScheduledTask> shuffled(ws.subtasks.size());
        for (std::size_t s = 0; s < perm.size(); ++s) {
            shuffled[s] = ws.subtasks[perm[s]];
            shuffled[s].slot = s;
        }
        ws.subtasks = std::move(shuffled);
    }
    return mlcc;
}

// Hybrid: L levels, level l an independently coded block with P_l subtasks
// per worker. Levels slice the cuboid along y with widths proportional to
// their information dimension.
inline HierarchySpec build_hhcc(const BaseCode& base, const Matrix& a, const Matrix& b,
                                std::size_t nlevels, const std::vector<std::size_t>& perLevel,
                                const RecoveryProfile& profile, std::size_t workers) {
    if (base.family != CodeFamily::Polynomial)
        throw std::invalid_argument("hhcc: polynomial bases only");
    if (perLevel.size() != nlevels || profile.thresholds.size() != nlevels)
        throw std::invalid_argument("hhcc: per-level lists must have length L");
    std::size_t p = 0;
    for (auto pl : perLevel) p += pl;
    if (p == 0) throw std::invalid_argument("hhcc: P must be positive");

    HierarchySpec spec;
    spec.mode = HierarchyMode::HHCC;
    spec.workers = workers;
    spec.subtasksPerWorker = p;
    spec.dims = {a.rows(), a.cols(), b.cols()};
    spec.base = base;
    spec.baseThreshold = recovery_threshold(base.family, base.grid);
    detail::check_budget(profile.sum(), p, spec.baseThreshold, "hhcc");

    std::vector<LevelShape> shapes(nlevels);
    for (std::size_t l = 0; l < nlevels; ++l) {
        const std::size_t r = profile.thresholds[l];
        if (r == 0) throw std::invalid_argument("hhcc: zero-threshold level");
        if (perLevel[l] * workers < r)
            throw std::invalid_argument("hhcc: level " + std::to_string(l + 1) +
                                        " block length below its threshold");
        shapes[l] = {r, r, GridSpec{1, 1, r}};
    }
    std::size_t dSum = 0;
    for (const auto& s : shapes) dSum += s.d;
    auto part = layered_partition(spec.dims, shapes, dSum);

    spec.levels.assign(nlevels, LevelCode{});
    spec.profile = profile.thresholds;
    for (const auto& tb : part.taskBlocks) {
        const std::size_t l = tb.level;
        LevelCode lc;
        lc.active = true;
        lc.block = tb;
        lc.batch = encode_polynomial(detail::block_of(a, tb.x, tb.z),
                                     detail::block_of(b, tb.z, tb.y), tb.grid,
                                     evaluation_points(workers * perLevel[l], base.points));
        lc.threshold = profile.thresholds[l];
        lc.slotsPerWorker = perLevel[l];
        spec.levels[l] = std::move(lc);
    }
    if (part.residual > 0) {
        std::size_t covered = 0;
        for (const auto& tb : part.taskBlocks) covered = std::max(covered, tb.y.hi);
        spec.residual = {true, Axis::Y, {covered, spec.dims.ny}};
    }

    for (std::size_t w = 0; w < workers; ++w) {
        WorkerSchedule ws{w, {}};
        std::size_t slot = 0;
        for (std::size_t l = 0; l < nlevels; ++l)
            for (std::size_t s = 0; s < perLevel[l]; ++s)
                ws.subtasks.push_back({l, slot++, spec.levels[l].batch.tasks[w * perLevel[l] + s]});
        spec.schedules.push_back(std::move(ws));
    }
    return spec;
}

// --- result aggregation ---------------------------------------------------

struct LevelAggregate {
    std::size_t threshold = 0;
    std::set<double> seen;
    std::vector<std::pair<double, Matrix>> decodeSet;  // first `threshold` arrivals

    bool complete() const { return decodeSet.size() >= threshold; }
};

// Single-consumer aggregation state; observe() is idempotent in the point and
// completion is monotone.
struct AggregationState {
    std::vector<LevelAggregate> levels;
    bool complete = false;
    std::size_t received = 0;

    explicit AggregationState(const std::vector<std::size_t>& profile) {
        levels.resize(profile.size());
        for (std::size_t l = 0; l < profile.size(); ++l) levels[l].threshold = profile[l];
        refresh();
    }

    explicit AggregationState(const HierarchySpec& spec) : AggregationState(spec.profile) {}

    // Returns false (and changes nothing) for a duplicate point at the level.
    bool observe(std::size_t level, double point, Matrix product) {
        auto& agg = levels.at(level);
        if (!agg.seen.insert(point).second) return false;
        ++received;
        if (agg.decodeSet.size() < agg.threshold)
            agg.decodeSet.emplace_back(point, std::move(product));
        refresh();
        return true;
    }

  private:
    void refresh() {
        for (const auto& l : levels)
            if (!l.complete()) {
                complete = false;
                return;
            }
        complete = true;
    }
};

// --- recovery --------------------------------------------------------------

struct LevelDecode {
    std::size_t level = 0;
    DecodeResult result;
};

// Decode one level from its frozen aggregation set.
inline LevelDecode decode_level(const HierarchySpec& spec, const AggregationState& state,
                                std::size_t level) {
    const auto& lc = spec.levels.at(level);
    if (!lc.active) throw std::invalid_argument("decode_level: empty level");
    if (!state.levels.at(level).complete())
        throw NotYetRecoverable("level " + std::to_string(level + 1) + " incomplete");
    return {level, decode(lc.batch.spec, state.levels[level].decodeSet)};
}

inline std::vector<LevelDecode> decode_levels(const HierarchySpec& spec,
                                              const AggregationState& state) {
    if (!state.complete) throw NotYetRecoverable("aggregation incomplete");
    std::vector<LevelDecode> out;
    for (std::size_t l = 0; l < spec.levels.size(); ++l)
        if (spec.levels[l].active) out.push_back(decode_level(spec, state, l));
    return out;
}

// Scatter decoded level products into the full matrix and let the master
// compute the uncovered residual slab directly.
inline Matrix assemble_product(const HierarchySpec& spec, const std::vector<LevelDecode>& decoded,
                               const Matrix& a, const Matrix& b) {
    Matrix c(spec.dims.nx, spec.dims.ny);
    for (const auto& ld : decoded) {
        const auto& blk = spec.levels[ld.level].block;
        add_into(c, ld.result.product, blk.x.lo, blk.y.lo);
    }
    if (spec.residual.present) {
        const auto& r = spec.residual;
        if (r.axis == Axis::Y)
            add_into(c, matmul_reference(a, extract_block(b, {{0, spec.dims.nz}, r.range})), 0,
                     r.range.lo);
        else if (r.axis == Axis::X)
            add_into(c, matmul_reference(extract_block(a, {r.range, {0, spec.dims.nz}}), b),
                     r.range.lo, 0);
        else
            add_into(c,
                     matmul_reference(extract_block(a, {{0, spec.dims.nx}, r.range}),
                                      extract_block(b, {r.range, {0, spec.dims.ny}})),
                     0, 0);
    }
    return c;
}

inline Matrix recover_product(const HierarchySpec& spec, const AggregationState& state,
                              const Matrix& a, const Matrix& b) {
    return assemble_product(spec, decode_levels(spec, state), a, b);
}

// --- analytic accounting ---------------------------------------------------

// Distinct input reals a worker receives; shared factors count once.
inline double per_worker_comm_in(const HierarchySpec& spec, std::size_t worker = 0) {
    std::set<const Matrix*> distinct;
    double reals = 0;
    for (const auto& st : spec.schedules.at(worker).subtasks) {
        for (const Matrix* m : {st.task.aHat.get(), st.task.bHat.get()})
            if (distinct.insert(m).second) reals += static_cast<double>(m->size());
    }
    return reals;
}

// Multiply-accumulate ops if the worker completes every slot.
inline double per_worker_comp_load(const HierarchySpec& spec, std::size_t worker = 0) {
    double ops = 0;
    for (const auto& st : spec.schedules.at(worker).subtasks)
        ops += static_cast<double>(st.task.aHat->rows()) *
               static_cast<double>(st.task.aHat->cols()) *
               static_cast<double>(st.task.bHat->cols());
    return ops;
}

inline double per_worker_comm_out(const HierarchySpec& spec, std::size_t worker = 0) {
    double reals = 0;
    for (const auto& st : spec.schedules.at(worker).subtasks)
        reals += static_cast<double>(st.task.aHat->rows()) *
                 static_cast<double>(st.task.bHat->cols());
    return reals;
}

}  // namespace hiercc
