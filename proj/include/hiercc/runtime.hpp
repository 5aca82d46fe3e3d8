#pragma once

#include <atomic>
#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hiercc/hierarchy.hpp"
#include "hiercc/matrix.hpp"
#include "hiercc/rng.hpp"

namespace hiercc {

enum class DecodeMode { Serial, Parallel, Streaming };

inline DecodeMode decode_mode_from_string(const std::string& s) {
    if (s == "serial") return DecodeMode::Serial;
    if (s == "parallel") return DecodeMode::Parallel;
    if (s == "streaming") return DecodeMode::Streaming;
    throw std::invalid_argument("unknown decode mode: " + s);
}

// Declarative scheme description the runtime can build into a HierarchySpec.
struct SchemeConfig {
    HierarchyMode mode = HierarchyMode::NonH;
    CodeFamily family = CodeFamily::Polynomial;
    GridSpec grid;
    std::size_t workers = 1;
    std::size_t p = 1;                  // subtasks per worker (BICC)
    std::size_t levels = 1;             // MLCC / RMLCC / HHCC
    std::vector<std::size_t> perLevel;  // HHCC subtasks per level
    std::vector<std::size_t> profile;   // per-level thresholds (multilevel modes)
    PointKind points = PointKind::Chebyshev;
    std::uint64_t shuffleSeed = 1;      // RMLCC level orders

    MlccLayout layout() const {
        switch (classify_partition(grid)) {
            case PartitionClass::MatDot: return MlccLayout::dominated(MlccDominance::Mz);
            case PartitionClass::MtxVec: return MlccLayout::dominated(MlccDominance::My);
            default:
                return MlccLayout::dominated(grid.mx >= grid.my ? MlccDominance::Mx
                                                                : MlccDominance::My);
        }
    }
};

inline HierarchySpec build_scheme(const SchemeConfig& c, const Matrix& a, const Matrix& b) {
    const BaseCode base{c.family, c.grid, c.points};
    switch (c.mode) {
        case HierarchyMode::NonH:
            return build_nonh(base, a, b, c.workers);
        case HierarchyMode::BICC:
            return build_bicc(base, a, b, c.p, c.workers);
        case HierarchyMode::MLCC:
            return build_mlcc(base, a, b, c.levels, {c.profile}, c.layout(), c.workers);
        case HierarchyMode::RMLCC:
            return build_rmlcc(
                build_mlcc(base, a, b, c.levels, {c.profile}, c.layout(), c.workers),
                c.shuffleSeed);
        case HierarchyMode::HHCC:
            return build_hhcc(base, a, b, c.levels, c.perLevel, {c.profile}, c.workers);
    }
    throw std::invalid_argument("unknown hierarchy mode");
}

struct RunConfig {
    Dims dims;
    SchemeConfig scheme;
    double stragglerProb = 0.0;  // Bernoulli(p) per worker
    std::uint64_t seed = 1;
    DecodeMode decodeMode = DecodeMode::Serial;
    bool cancelOnComplete = true;
    std::size_t decodeThreads = 0;  // 0: hardware concurrency

    void validate() const {
        if (stragglerProb < 0.0 || stragglerProb > 1.0)
            throw std::invalid_argument("straggler probability must lie in [0, 1]");
    }
};

struct CompletionRecord {
    double timeSeconds = 0;  // since compute launch
    std::size_t worker = 0;
    std::size_t level = 0;
    std::size_t slot = 0;
};

struct PhaseTimes {
    double encode = 0;
    double distribute = 0;
    double compute = 0;   // launch until the recovery rule is met
    double aggregate = 0; // master time spent logging and folding results
    double decode = 0;    // completeness until the last level decode ends
};

struct RunReport {
    PhaseTimes phaseTimes;
    std::vector<double> perWorkerComputeSeconds;
    std::vector<CompletionRecord> completionLog;
    Matrix product;
    double relError = 0;
    std::vector<std::size_t> stragglers;
    std::size_t received = 0;  // results folded in before completeness
    bool illConditioned = false;
    double maxCondition = 0;
    double totalSeconds = 0;
};

struct RunOutcome {
    RunReport report;
    HierarchySpec spec;
    AggregationState state;
    std::vector<LevelDecode> decoded;
};

// The straggler set is a pure function of (seed, p, N).
inline std::vector<bool> straggler_flags(std::uint64_t seed, double p, std::size_t n) {
    RngStream rng(seed, 0x53545241474c5245ULL, 0);
    std::vector<bool> flags(n, false);
    for (std::size_t w = 0; w < n; ++w) flags[w] = rng.next_double() < p;
    return flags;
}

namespace detail {

struct Message {
    std::size_t worker = 0, level = 0, slot = 0;
    double point = 0;
    Matrix product;
    double tDone = 0;
    double busySeconds = 0;  // worker's multiply time so far
    bool failed = false;
    std::string diagnostic;
};

struct Channel {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Message> q;

    void push(Message m) {
        {
            std::lock_guard lock(mu);
            q.push_back(std::move(m));
        }
        cv.notify_one();
    }

    Message pop() {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return !q.empty(); });
        Message m = std::move(q.front());
        q.pop_front();
        return m;
    }
};

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Decode the given levels on up to `threads` threads, one level per task.
// Per-level decoding is single threaded, so outputs do not depend on the
// parallelism degree.
inline std::vector<LevelDecode> decode_parallel_levels(const HierarchySpec& spec,
                                                       const AggregationState& state,
                                                       std::size_t threads) {
    std::vector<std::size_t> active;
    for (std::size_t l = 0; l < spec.levels.size(); ++l)
        if (spec.levels[l].active) active.push_back(l);
    std::vector<LevelDecode> out(active.size());
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, active.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < active.size(); i = next.fetch_add(1))
                out[i] = decode_level(spec, state, active[i]);
        });
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace detail

// Decode an already-complete aggregation state under the given mode and
// report the wall time of the decode phase. All modes produce identical
// level results; only the scheduling differs.
inline std::pair<std::vector<LevelDecode>, double> decode_with_mode(
    const HierarchySpec& spec, const AggregationState& state, DecodeMode mode,
    std::size_t threads = 0) {
    const auto t0 = detail::Clock::now();
    std::vector<LevelDecode> decoded;
    if (mode == DecodeMode::Parallel)
        decoded = detail::decode_parallel_levels(spec, state, threads);
    else
        decoded = decode_levels(spec, state);  // streaming collapses to serial here
    return {std::move(decoded), detail::seconds_since(t0)};
}

// Execute the full six-phase protocol in process: encode, distribute, N
// worker threads computing their schedules sequentially, master aggregation,
// decode, and assembly. Stragglers run every multiply twice.
inline RunOutcome run_job(const RunConfig& config, const Matrix& a, const Matrix& b,
                          const Matrix* reference = nullptr) {
    config.validate();
    if (a.rows() != config.dims.nx || a.cols() != config.dims.nz ||
        b.rows() != config.dims.nz || b.cols() != config.dims.ny)
        throw std::invalid_argument("run_job: matrices do not match configured dims");

    RunOutcome outcome{RunReport{}, HierarchySpec{}, AggregationState({1}), {}};
    auto& report = outcome.report;
    const auto jobStart = detail::Clock::now();

    // phase 1+2: partition and encode
    auto t = detail::Clock::now();
    outcome.spec = build_scheme(config.scheme, a, b);
    report.phaseTimes.encode = detail::seconds_since(t);
    const auto& spec = outcome.spec;
    const std::size_t n = spec.workers;

    const auto flags = straggler_flags(config.seed, config.stragglerProb, n);
    for (std::size_t w = 0; w < n; ++w)
        if (flags[w]) report.stragglers.push_back(w);

    // phase 3: hand each worker its task list (channel transfer stand-in)
    t = detail::Clock::now();
    std::vector<std::vector<ScheduledTask>> inbox(n);
    for (std::size_t w = 0; w < n; ++w) inbox[w] = spec.schedules[w].subtasks;
    report.phaseTimes.distribute = detail::seconds_since(t);

    // phase 4+5: workers compute sequentially, master aggregates
    detail::Channel channel;
    std::atomic<bool> cancel{false};
    const auto launch = detail::Clock::now();
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (std::size_t w = 0; w < n; ++w)
        workers.emplace_back([&, w] {
            double busy = 0;
            try {
                for (const auto& st : inbox[w]) {
                    if (cancel.load(std::memory_order_relaxed)) break;
                    const auto c0 = detail::Clock::now();
                    Matrix product = matmul_reference(*st.task.aHat, *st.task.bHat);
                    if (flags[w]) {
                        // honest half-speed: the duplicated multiply is real work
                        Matrix dup = matmul_reference(*st.task.aHat, *st.task.bHat);
                        if (dup(0, 0) != product(0, 0)) throw std::runtime_error("nondeterministic multiply");
                    }
                    busy += detail::seconds_since(c0);
                    channel.push({w, st.level, st.slot, st.task.point, std::move(product),
                                  detail::seconds_since(launch), busy, false, {}});
                }
                channel.push({w, 0, 0, 0, Matrix(), detail::seconds_since(launch), busy, false,
                              "done"});
            } catch (const std::exception& e) {
                channel.push({w, 0, 0, 0, Matrix(), detail::seconds_since(launch), busy, true,
                              e.what()});
            }
        });

    AggregationState state(spec);
    report.perWorkerComputeSeconds.assign(n, 0.0);
    std::vector<bool> levelDecodedFlag(spec.levels.size(), false);

    // streaming decode: a dedicated thread consumes levels as they complete
    std::mutex streamMu;
    std::condition_variable streamCv;
    std::deque<std::size_t> streamQueue;
    bool streamDone = false;
    std::vector<LevelDecode> streamDecoded;
    double firstDecodeStart = -1, lastDecodeEnd = -1;
    std::thread decoder;
    if (config.decodeMode == DecodeMode::Streaming)
        decoder = std::thread([&] {
            while (true) {
                std::size_t level;
                {
                    std::unique_lock lock(streamMu);
                    streamCv.wait(lock, [&] { return streamDone || !streamQueue.empty(); });
                    if (streamQueue.empty()) return;
                    level = streamQueue.front();
                    streamQueue.pop_front();
                }
                const double s0 = detail::seconds_since(launch);
                auto ld = decode_level(spec, state, level);
                const double s1 = detail::seconds_since(launch);
                std::lock_guard lock(streamMu);
                if (firstDecodeStart < 0) firstDecodeStart = s0;
                lastDecodeEnd = s1;
                streamDecoded.push_back(std::move(ld));
            }
        });

    auto enqueue_stream = [&](std::size_t level) {
        std::lock_guard lock(streamMu);
        streamQueue.push_back(level);
        streamCv.notify_one();
    };

    std::size_t liveWorkers = n;
    double aggregateBusy = 0;
    std::string failure;
    while (!state.complete && liveWorkers > 0) {
        auto msg = channel.pop();
        if (msg.failed) {
            failure = "worker " + std::to_string(msg.worker) + ": " + msg.diagnostic;
            break;
        }
        report.perWorkerComputeSeconds[msg.worker] = msg.busySeconds;
        if (msg.diagnostic == "done") {
            --liveWorkers;
            continue;
        }
        const auto a0 = detail::Clock::now();
        report.completionLog.push_back({msg.tDone, msg.worker, msg.level, msg.slot});
        state.observe(msg.level, msg.point, std::move(msg.product));
        if (config.decodeMode == DecodeMode::Streaming && spec.levels[msg.level].active &&
            !levelDecodedFlag[msg.level] && state.levels[msg.level].complete()) {
            levelDecodedFlag[msg.level] = true;
            enqueue_stream(msg.level);
        }
        aggregateBusy += detail::seconds_since(a0);
    }
    const double completeAt = detail::seconds_since(launch);
    report.phaseTimes.compute = completeAt;
    report.phaseTimes.aggregate = aggregateBusy;
    report.received = report.completionLog.size();

    if (config.cancelOnComplete || !failure.empty()) cancel.store(true);

    if (!failure.empty()) {
        {
            std::lock_guard lock(streamMu);
            streamDone = true;
        }
        streamCv.notify_all();
        if (decoder.joinable()) decoder.join();
        for (auto& th : workers) th.join();
        throw std::runtime_error("job aborted: " + failure);
    }

    // phase 6: decode. Streaming overlaps the remaining computation by
    // design; serial and parallel decoding start once the workers are done,
    // so the measured decode time is not polluted by in-flight subtasks.
    if (config.decodeMode == DecodeMode::Streaming) {
        {
            std::lock_guard lock(streamMu);
            streamDone = true;
        }
        streamCv.notify_all();
        decoder.join();
        outcome.decoded = std::move(streamDecoded);
        std::sort(outcome.decoded.begin(), outcome.decoded.end(),
                  [](const LevelDecode& x, const LevelDecode& y) { return x.level < y.level; });
        report.phaseTimes.decode = std::max(0.0, lastDecodeEnd - completeAt);
        for (auto& th : workers) th.join();
    } else {
        for (auto& th : workers) th.join();
        auto [decoded, wall] =
            decode_with_mode(spec, state, config.decodeMode, config.decodeThreads);
        outcome.decoded = std::move(decoded);
        report.phaseTimes.decode = wall;
    }

    for (const auto& ld : outcome.decoded) {
        report.maxCondition = std::max(report.maxCondition, ld.result.conditionEstimate);
        report.illConditioned = report.illConditioned || ld.result.illConditioned;
    }

    report.product = assemble_product(spec, outcome.decoded, a, b);
    const Matrix* ref = reference;
    Matrix computedRef;
    if (!ref) {
        computedRef = matmul_reference(a, b);
        ref = &computedRef;
    }
    report.relError = relative_frobenius_error(report.product, *ref);
    report.totalSeconds = detail::seconds_since(jobStart);
    outcome.state = std::move(state);
    return outcome;
}

// Mean per-phase times over repeated runs of one configuration. The reference
// product is computed once and shared.
struct SweepResult {
    RunConfig config;
    std::size_t repeats = 0;
    PhaseTimes meanPhases;
    double meanWorkerCompute = 0;  // mean over workers of counted busy seconds
    double meanRelError = 0;
    double meanTotal = 0;
};

inline SweepResult sweep_one(RunConfig config, const Matrix& a, const Matrix& b,
                             std::size_t repeats, const Matrix* reference) {
    SweepResult res;
    res.config = config;
    res.repeats = repeats;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        config.seed = res.config.seed + rep;
        const auto outcome = run_job(config, a, b, reference);
        const auto& p = outcome.report.phaseTimes;
        res.meanPhases.encode += p.encode;
        res.meanPhases.distribute += p.distribute;
        res.meanPhases.compute += p.compute;
        res.meanPhases.aggregate += p.aggregate;
        res.meanPhases.decode += p.decode;
        double busy = 0;
        for (double s : outcome.report.perWorkerComputeSeconds) busy += s;
        res.meanWorkerCompute += busy / static_cast<double>(outcome.spec.workers);
        res.meanRelError += outcome.report.relError;
        res.meanTotal += outcome.report.totalSeconds;
    }
    const auto denom = static_cast<double>(repeats);
    res.meanPhases.encode /= denom;
    res.meanPhases.distribute /= denom;
    res.meanPhases.compute /= denom;
    res.meanPhases.aggregate /= denom;
    res.meanPhases.decode /= denom;
    res.meanWorkerCompute /= denom;
    res.meanRelError /= denom;
    res.meanTotal /= denom;
    return res;
}

inline std::vector<SweepResult> sweep(const std::vector<RunConfig>& configs, const Matrix& a,
                                      const Matrix& b, std::size_t repeats,
                                      const Matrix* reference = nullptr) {
    std::vector<SweepResult> out;
    out.reserve(configs.size());
    for (const auto& c : configs) out.push_back(sweep_one(c, a, b, repeats, reference));
    return out;
}

}  // namespace hiercc
