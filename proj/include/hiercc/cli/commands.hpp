#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiercc/json_export.hpp"
#include "hiercc/matrix_io.hpp"
#include "hiercc/profile_opt.hpp"
#include "hiercc/runtime.hpp"
#include "hiercc/stoch_sim.hpp"

namespace hiercc::cli {

using json = nlohmann::json;

// One scheme point in a simulation or runtime sweep.
struct SchemeEntry {
    HierarchyMode mode = HierarchyMode::NonH;
    std::optional<CodeFamily> family;          // defaults to the config base
    std::optional<GridSpec> grid;              // defaults to the config base
    std::optional<std::size_t> workers;        // defaults to the config fleet
    std::vector<std::size_t> pValues{1};       // BICC sweep axis
    std::vector<std::size_t> lValues{1};       // MLCC/RMLCC sweep axis
    std::vector<std::size_t> perLevel;         // HHCC
    std::vector<std::size_t> profile;          // explicit per-level thresholds
    std::string profileRule = "optimized";     // optimized | uniform (when profile empty)
    std::string label;
};

struct ProfileSweepEntry {
    std::string label;
    double muComm = 1e-8;
    double alphaComm = 1e-9;
};

// Declarative experiment description; CLI flags override individual fields.
struct ExperimentConfig {
    Dims dims{1000, 1000, 1000};
    TimingModel timing{1e-6, 1e-7, 1e-8, 1e-9};
    std::size_t workers = 20;
    CodeFamily family = CodeFamily::Polynomial;
    GridSpec grid{4, 1, 1};
    PointKind points = PointKind::Chebyshev;
    Regime regime = Regime::Full;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;

    std::vector<SchemeEntry> simulate;
    std::vector<ProfileSweepEntry> profileSweep;
    std::size_t optimizeLevels = 1;
    Regime optimizeRegime = Regime::FastNetwork;

    double stragglerProb = 0.0;
    DecodeMode decodeMode = DecodeMode::Serial;
    bool cancelOnComplete = true;
    std::size_t repeats = 1;
    std::optional<SchemeEntry> runScheme;
    std::vector<SchemeEntry> sweepSchemes;

    std::size_t tradeoffP = 10;
    std::vector<std::size_t> tradeoffLh;
    bool tradeoffBaselines = true;  // include uncoded and plain polynomial rows
};

namespace detail {

inline GridSpec grid_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("grid must be an array [mx, mz, my]");
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

inline std::vector<std::size_t> sizes_from_json(const json& j) {
    std::vector<std::size_t> out;
    for (const auto& v : j) out.push_back(v.get<std::size_t>());
    return out;
}

inline SchemeEntry scheme_from_json(const json& j) {
    SchemeEntry e;
    e.mode = hierarchy_mode_from_string(j.at("scheme").get<std::string>());
    if (j.contains("family")) e.family = code_family_from_string(j["family"].get<std::string>());
    if (j.contains("grid")) e.grid = grid_from_json(j["grid"]);
    if (j.contains("workers")) e.workers = j["workers"].get<std::size_t>();
    if (j.contains("p"))
        e.pValues = j["p"].is_array() ? sizes_from_json(j["p"])
                                      : std::vector<std::size_t>{j["p"].get<std::size_t>()};
    if (j.contains("l"))
        e.lValues = j["l"].is_array() ? sizes_from_json(j["l"])
                                      : std::vector<std::size_t>{j["l"].get<std::size_t>()};
    if (j.contains("per_level")) e.perLevel = sizes_from_json(j["per_level"]);
    if (j.contains("profile")) {
        if (j["profile"].is_array())
            e.profile = sizes_from_json(j["profile"]);
        else
            e.profileRule = j["profile"].get<std::string>();
    }
    if (j.contains("label")) e.label = j["label"].get<std::string>();
    return e;
}

inline json scheme_to_json(const SchemeEntry& e) {
    json j;
    j["scheme"] = to_string(e.mode);
    if (e.family) j["family"] = to_string(*e.family);
    if (e.grid) j["grid"] = json::array({e.grid->mx, e.grid->mz, e.grid->my});
    if (e.workers) j["workers"] = *e.workers;
    j["p"] = e.pValues;
    j["l"] = e.lValues;
    if (!e.perLevel.empty()) j["per_level"] = e.perLevel;
    if (!e.profile.empty())
        j["profile"] = e.profile;
    else
        j["profile"] = e.profileRule;
    if (!e.label.empty()) j["label"] = e.label;
    return j;
}

inline std::string join_profile(const std::vector<std::size_t>& profile) {
    std::string out;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(profile[i]);
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    if (j.contains("dims")) {
        const auto& d = j["dims"];
        c.dims = {d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>(),
                  d.at(2).get<std::size_t>()};
    }
    if (j.contains("timing")) {
        const auto& t = j["timing"];
        c.timing.muComp = t.value("mu_comp", c.timing.muComp);
        c.timing.alphaComp = t.value("alpha_comp", c.timing.alphaComp);
        c.timing.muComm = t.value("mu_comm", c.timing.muComm);
        c.timing.alphaComm = t.value("alpha_comm", c.timing.alphaComm);
    }
    if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
    if (j.contains("base")) {
        c.family = code_family_from_string(j["base"].value("family", "polynomial"));
        if (j["base"].contains("grid")) c.grid = detail::grid_from_json(j["base"]["grid"]);
    }
    if (j.contains("points")) c.points = point_kind_from_string(j["points"].get<std::string>());
    if (j.contains("regime")) c.regime = regime_from_string(j["regime"].get<std::string>());
    if (j.contains("trials")) c.trials = j["trials"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
    if (j.contains("simulate"))
        for (const auto& e : j["simulate"]) c.simulate.push_back(detail::scheme_from_json(e));
    if (j.contains("profile_sweep"))
        for (const auto& e : j["profile_sweep"])
            c.profileSweep.push_back({e.value("label", ""), e.at("mu_comm").get<double>(),
                                      e.at("alpha_comm").get<double>()});
    if (j.contains("optimize")) {
        c.optimizeLevels = j["optimize"].value("levels", std::size_t{1});
        if (j["optimize"].contains("regime"))
            c.optimizeRegime = regime_from_string(j["optimize"]["regime"].get<std::string>());
    }
    if (j.contains("straggler_prob")) c.stragglerProb = j["straggler_prob"].get<double>();
    if (j.contains("decode"))
        c.decodeMode = decode_mode_from_string(j["decode"].get<std::string>());
    if (j.contains("cancel_on_complete")) c.cancelOnComplete = j["cancel_on_complete"].get<bool>();
    if (j.contains("repeats")) c.repeats = j["repeats"].get<std::size_t>();
    if (j.contains("run")) c.runScheme = detail::scheme_from_json(j["run"]);
    if (j.contains("sweep"))
        for (const auto& e : j["sweep"]) c.sweepSchemes.push_back(detail::scheme_from_json(e));
    if (j.contains("tradeoff")) {
        c.tradeoffP = j["tradeoff"].value("p", std::size_t{10});
        if (j["tradeoff"].contains("lh")) c.tradeoffLh = detail::sizes_from_json(j["tradeoff"]["lh"]);
        c.tradeoffBaselines = j["tradeoff"].value("baselines", true);
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config " + path);
    json j;
    is >> j;
    return parse_config(j);
}

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["dims"] = json::array({c.dims.nx, c.dims.nz, c.dims.ny});
    j["timing"] = {{"mu_comp", c.timing.muComp},
                   {"alpha_comp", c.timing.alphaComp},
                   {"mu_comm", c.timing.muComm},
                   {"alpha_comm", c.timing.alphaComm}};
    j["workers"] = c.workers;
    j["base"] = {{"family", to_string(c.family)},
                 {"grid", json::array({c.grid.mx, c.grid.mz, c.grid.my})}};
    j["points"] = c.points == PointKind::Chebyshev ? "chebyshev" : "integer";
    j["regime"] = c.regime == Regime::Full          ? "full"
                  : c.regime == Regime::FastNetwork ? "fast-network"
                                                    : "fast-worker";
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    if (!c.simulate.empty()) {
        j["simulate"] = json::array();
        for (const auto& e : c.simulate) j["simulate"].push_back(detail::scheme_to_json(e));
    }
    if (!c.profileSweep.empty()) {
        j["profile_sweep"] = json::array();
        for (const auto& e : c.profileSweep)
            j["profile_sweep"].push_back(
                {{"label", e.label}, {"mu_comm", e.muComm}, {"alpha_comm", e.alphaComm}});
    }
    j["optimize"] = {{"levels", c.optimizeLevels},
                     {"regime", c.optimizeRegime == Regime::FastWorker ? "fast-worker"
                                                                       : "fast-network"}};
    j["straggler_prob"] = c.stragglerProb;
    j["decode"] = c.decodeMode == DecodeMode::Serial     ? "serial"
                  : c.decodeMode == DecodeMode::Parallel ? "parallel"
                                                         : "streaming";
    j["cancel_on_complete"] = c.cancelOnComplete;
    j["repeats"] = c.repeats;
    if (c.runScheme) j["run"] = detail::scheme_to_json(*c.runScheme);
    if (!c.sweepSchemes.empty()) {
        j["sweep"] = json::array();
        for (const auto& e : c.sweepSchemes) j["sweep"].push_back(detail::scheme_to_json(e));
    }
    if (!c.tradeoffLh.empty())
        j["tradeoff"] = {{"p", c.tradeoffP}, {"lh", c.tradeoffLh},
                         {"baselines", c.tradeoffBaselines}};
    return j;
}

// Resolve a per-level threshold profile for L levels over the base code.
inline std::vector<std::size_t> resolve_profile(const ExperimentConfig& c, const SchemeEntry& e,
                                                std::size_t bigL, std::size_t workers) {
    if (!e.profile.empty()) {
        if (e.profile.size() != bigL)
            throw std::invalid_argument("profile length does not match L");
        return e.profile;
    }
    const std::size_t r = recovery_threshold(e.family.value_or(c.family),
                                             e.grid.value_or(c.grid), workers);
    RegimeParams params{workers, r, bigL, c.timing.muComp, c.timing.alphaComp,
                        c.timing.muComm, c.timing.alphaComm};
    if (e.profileRule == "uniform") return std::vector<std::size_t>(bigL, r);
    if (e.profileRule == "optimized") return optimize_fast_network(params).profile.thresholds;
    if (e.profileRule == "fast-worker") return optimize_fast_worker(params).profile.thresholds;
    throw std::invalid_argument("unknown profile rule: " + e.profileRule);
}

// --- simulate ---------------------------------------------------------------

// One CSV row per (scheme, L or P) point: Monte Carlo finishing-time stats.
inline void cmd_simulate(const ExperimentConfig& c, std::ostream& os) {
    os << "# schema=1\n";
    os << "scheme,L,P,N,R,profile,mean,stddev,p50,p95,p99,trials,seed\n";

    for (const auto& e : c.profileSweep) {
        RegimeParams params{c.workers,
                            recovery_threshold(c.family, c.grid, c.workers),
                            c.optimizeLevels,
                            c.timing.muComp,
                            c.timing.alphaComp,
                            e.muComm,
                            e.alphaComm};
        // communication dominating by orders of magnitude selects the
        // fast-worker optimum; otherwise the fast-network program applies
        const bool fastWorker = e.muComm * load_profile(c.grid, c.dims).commIn >
                                c.timing.muComp * load_profile(c.grid, c.dims).comp;
        const auto prof =
            fastWorker ? optimize_fast_worker(params) : optimize_fast_network(params);
        os << (e.label.empty() ? "profile" : e.label) << ',' << c.optimizeLevels << ",1,"
           << c.workers << ',' << params.threshold << ','
           << detail::join_profile(prof.profile.thresholds) << ',' << prof.objective
           << ",0,0,0,0,0," << c.seed << '\n';
    }

    for (const auto& e : c.simulate) {
        const CodeFamily family = e.family.value_or(c.family);
        const GridSpec grid = e.grid.value_or(c.grid);
        const std::size_t n = e.workers.value_or(c.workers);
        const std::size_t r = recovery_threshold(family, grid, n);
        const SimDominance dom = classify_partition(grid) == PartitionClass::MatDot
                                     ? SimDominance::Mz
                                     : SimDominance::MxOrMy;

        auto emit = [&](std::size_t bigL, std::size_t p, const std::string& profileText,
                        const std::function<double(std::size_t)>& trial) {
            const auto stats = monte_carlo(trial, c.trials, c.seed, c.threads);
            os << to_string(e.mode) << ',' << bigL << ',' << p << ',' << n << ',' << r << ','
               << profileText << ',' << stats.mean << ',' << stats.stddev << ',' << stats.p50
               << ',' << stats.p95 << ',' << stats.p99 << ',' << stats.trials << ','
               << stats.seed << '\n';
        };

        switch (e.mode) {
            case HierarchyMode::NonH:
                emit(1, 1, std::to_string(r), [&](std::size_t t) {
                    return finishing_nonh(sample_draws(c.timing, n, c.seed, t), c.dims, grid, r,
                                          c.regime)
                        .finishingTime;
                });
                break;
            case HierarchyMode::BICC:
                for (std::size_t p : e.pValues) {
                    GridSpec expanded = grid;
                    if (family == CodeFamily::MatDot)
                        expanded.mz *= p;
                    else
                        expanded.my *= p;
                    const std::size_t rB = recovery_threshold(family, expanded, n * p);
                    emit(1, p, std::to_string(rB), [&](std::size_t t) {
                        return finishing_bicc(sample_draws(c.timing, n, c.seed, t), c.dims, grid,
                                              p, rB, c.regime)
                            .finishingTime;
                    });
                }
                break;
            case HierarchyMode::MLCC:
                for (std::size_t bigL : e.lValues) {
                    const auto profile = resolve_profile(c, e, bigL, n);
                    emit(bigL, bigL, detail::join_profile(profile), [&](std::size_t t) {
                        return finishing_mlcc(sample_draws(c.timing, n, c.seed, t), c.dims, grid,
                                              profile, dom, c.regime)
                            .finishingTime;
                    });
                }
                break;
            case HierarchyMode::RMLCC:
                for (std::size_t bigL : e.lValues) {
                    emit(bigL, bigL, detail::join_profile(std::vector<std::size_t>(bigL, r)),
                         [&](std::size_t t) {
                             const auto draws = sample_draws(c.timing, n, c.seed, t);
                             return finishing_rmlcc(draws, c.dims, grid, bigL, r,
                                                    rmlcc_positions(n, bigL, c.seed, t), c.regime)
                                 .finishingTime;
                         });
                }
                break;
            case HierarchyMode::HHCC: {
                if (e.perLevel.empty())
                    throw std::invalid_argument("hhcc simulation needs per_level");
                const auto profile = resolve_profile(c, e, e.perLevel.size(), n);
                std::size_t p = 0;
                for (auto pl : e.perLevel) p += pl;
                emit(e.perLevel.size(), p, detail::join_profile(profile), [&](std::size_t t) {
                    return finishing_hhcc(sample_draws(c.timing, n, c.seed, t), c.dims, grid,
                                          e.perLevel, profile, c.regime)
                        .finishingTime;
                });
                break;
            }
        }
    }
}

// --- optimize-profile -------------------------------------------------------

inline json cmd_optimize_profile(const ExperimentConfig& c) {
    const std::size_t r = recovery_threshold(c.family, c.grid, c.workers);
    RegimeParams params{c.workers,      r,
                        c.optimizeLevels, c.timing.muComp,
                        c.timing.alphaComp, c.timing.muComm,
                        c.timing.alphaComm};
    const auto res = c.optimizeRegime == Regime::FastWorker ? optimize_fast_worker(params)
                                                            : optimize_fast_network(params);
    json out;
    out["profile"] = res.profile.thresholds;
    out["objective"] = res.objective;
    out["regime"] = c.optimizeRegime == Regime::FastWorker ? "fast-worker" : "fast-network";
    out["workers"] = c.workers;
    out["threshold"] = r;
    out["levels"] = c.optimizeLevels;
    return out;
}

// --- run ---------------------------------------------------------------------

inline SchemeConfig scheme_config_from_entry(const ExperimentConfig& c, const SchemeEntry& e) {
    SchemeConfig s;
    s.mode = e.mode;
    s.family = e.family.value_or(c.family);
    s.grid = e.grid.value_or(c.grid);
    s.workers = e.workers.value_or(c.workers);
    s.points = c.points;
    s.shuffleSeed = c.seed;
    s.p = e.pValues.front();
    s.levels = e.lValues.front();
    s.perLevel = e.perLevel;
    if (e.mode == HierarchyMode::MLCC || e.mode == HierarchyMode::RMLCC)
        s.profile = e.mode == HierarchyMode::RMLCC
                        ? std::vector<std::size_t>(s.levels,
                                                   recovery_threshold(s.family, s.grid, s.workers))
                        : resolve_profile(c, e, s.levels, s.workers);
    if (e.mode == HierarchyMode::HHCC) {
        if (e.profile.empty())
            throw std::invalid_argument("hhcc run needs an explicit profile");
        s.levels = e.perLevel.size();
        s.profile = e.profile;
    }
    return s;
}

inline RunConfig run_config_from(const ExperimentConfig& c, const SchemeEntry& e) {
    RunConfig rc;
    rc.dims = c.dims;
    rc.scheme = scheme_config_from_entry(c, e);
    rc.stragglerProb = c.stragglerProb;
    rc.seed = c.seed;
    rc.decodeMode = c.decodeMode;
    rc.cancelOnComplete = c.cancelOnComplete;
    rc.decodeThreads = c.threads;
    return rc;
}

// Runs the configured scheme on the given matrices (or seeded random ones)
// and returns the report as JSON.
inline json cmd_run(const ExperimentConfig& c, const Matrix* aIn = nullptr,
                    const Matrix* bIn = nullptr, const std::string& logCsvPath = {},
                    const std::string& scheduleJsonPath = {}) {
    if (!c.runScheme) throw std::invalid_argument("config has no run section");
    Matrix a, b;
    if (aIn && bIn) {
        a = *aIn;
        b = *bIn;
    } else {
        RngStream ra(c.seed, 0xA0, 0), rb(c.seed, 0xB0, 0);
        a = Matrix(c.dims.nx, c.dims.nz);
        b = Matrix(c.dims.nz, c.dims.ny);
        for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = 2.0 * ra.next_double() - 1.0;
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 2.0 * rb.next_double() - 1.0;
    }
    const auto rc = run_config_from(c, *c.runScheme);
    const auto outcome = run_job(rc, a, b);
    if (!logCsvPath.empty()) {
        std::ofstream os(logCsvPath);
        write_completion_log_csv(outcome.report, os);
    }
    if (!scheduleJsonPath.empty()) {
        std::ofstream os(scheduleJsonPath);
        json j;
        j["schedules"] = schedules_to_json(outcome.spec);
        j["partition"] = partition_to_json(outcome.spec);
        os << j.dump(2) << '\n';
    }
    json out = report_to_json(outcome.report);
    out["scheme"] = to_string(rc.scheme.mode);
    out["seed"] = c.seed;
    return out;
}

// --- sweep -------------------------------------------------------------------

inline void write_sweep_csv(const std::vector<SweepResult>& rows,
                            const std::vector<std::string>& labels, std::ostream& os) {
    os << "# schema=1\n";
    os << "label,mode,N,P,L,repeats,encode,distribute,compute_wall,worker_compute,aggregate,"
          "decode,rel_error,total\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << labels[i] << ',' << to_string(r.config.scheme.mode) << ','
           << r.config.scheme.workers << ',' << r.config.scheme.p << ','
           << r.config.scheme.levels << ',' << r.repeats << ',' << r.meanPhases.encode << ','
           << r.meanPhases.distribute << ',' << r.meanPhases.compute << ','
           << r.meanWorkerCompute << ',' << r.meanPhases.aggregate << ','
           << r.meanPhases.decode << ',' << r.meanRelError << ',' << r.meanTotal << '\n';
    }
}

inline std::vector<SweepResult> cmd_sweep(const ExperimentConfig& c, std::ostream& os) {
    if (c.sweepSchemes.empty()) throw std::invalid_argument("config has no sweep section");
    RngStream ra(c.seed, 0xA0, 0), rb(c.seed, 0xB0, 0);
    Matrix a(c.dims.nx, c.dims.nz), b(c.dims.nz, c.dims.ny);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = 2.0 * ra.next_double() - 1.0;
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 2.0 * rb.next_double() - 1.0;
    const Matrix reference = matmul_reference(a, b);

    std::vector<SweepResult> rows;
    std::vector<std::string> labels;
    for (const auto& e : c.sweepSchemes) {
        rows.push_back(sweep_one(run_config_from(c, e), a, b, c.repeats, &reference));
        labels.push_back(e.label.empty() ? to_string(e.mode) : e.label);
    }
    write_sweep_csv(rows, labels, os);
    return rows;
}

// --- tradeoff ----------------------------------------------------------------

// Decode-time vs compute-time frontier across the hybrid family: L_H levels,
// each with P/L_H subtasks per worker, between the single-code (L_H = 1) and
// one-level-per-subtask (L_H = P) extremes.
inline std::vector<SweepResult> cmd_tradeoff(const ExperimentConfig& c, std::ostream& os) {
    if (c.tradeoffLh.empty()) throw std::invalid_argument("config has no tradeoff section");
    const std::size_t p = c.tradeoffP;
    const std::size_t r = recovery_threshold(c.family, c.grid, c.workers);

    // per-slot profile from the fast-network program at L = P, then grouped
    RegimeParams params{c.workers, r, p, c.timing.muComp, c.timing.alphaComp,
                        c.timing.muComm, c.timing.alphaComm};
    const auto fine = optimize_fast_network(params).profile.thresholds;

    RngStream ra(c.seed, 0xA0, 0), rb(c.seed, 0xB0, 0);
    Matrix a(c.dims.nx, c.dims.nz), b(c.dims.nz, c.dims.ny);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = 2.0 * ra.next_double() - 1.0;
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 2.0 * rb.next_double() - 1.0;
    const Matrix reference = matmul_reference(a, b);

    std::vector<SweepResult> rows;
    std::vector<std::string> labels;

    if (c.tradeoffBaselines) {
        SchemeEntry unc;
        unc.mode = HierarchyMode::NonH;
        unc.family = CodeFamily::Uncoded;
        unc.grid = GridSpec{1, 1, r};
        unc.workers = r;
        rows.push_back(sweep_one(run_config_from(c, unc), a, b, c.repeats, &reference));
        labels.push_back("uncoded");

        SchemeEntry poly;
        poly.mode = HierarchyMode::NonH;
        rows.push_back(sweep_one(run_config_from(c, poly), a, b, c.repeats, &reference));
        labels.push_back("poly");
    }

    for (std::size_t lh : c.tradeoffLh) {
        if (p % lh != 0)
            throw std::invalid_argument("tradeoff: L_H must divide P");
        const std::size_t slots = p / lh;
        // group the fine profile into L_H consecutive blocks
        std::vector<std::size_t> profile(lh, 0);
        for (std::size_t i = 0; i < p; ++i) profile[i / slots] += fine[i];
        SchemeEntry e;
        e.mode = HierarchyMode::HHCC;
        e.perLevel.assign(lh, slots);
        e.profile = profile;
        e.lValues = {lh};
        e.label = "hhcc_lh" + std::to_string(lh);
        rows.push_back(sweep_one(run_config_from(c, e), a, b, c.repeats, &reference));
        labels.push_back(e.label);
    }
    write_sweep_csv(rows, labels, os);
    return rows;
}

// --- fit ----------------------------------------------------------------------

inline json cmd_fit(std::istream& samplesCsv) {
    std::vector<double> samples;
    std::string line;
    while (std::getline(samplesCsv, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) samples.push_back(std::stod(cell));
    }
    const auto fit = fit_shifted_exponential(samples);
    return json{{"mu", fit.mu}, {"alpha", fit.alpha}, {"degenerate", fit.degenerate},
                {"samples", samples.size()}};
}

}  // namespace hiercc::cli
