#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hiercc/hierarchy.hpp"
#include "hiercc/matrix_io.hpp"
#include "hiercc/runtime.hpp"

namespace hiercc {

using json = nlohmann::json;

inline json range_to_json(const IndexRange& r) { return json::array({r.lo, r.hi}); }

inline json grid_to_json(const GridSpec& g) { return json::array({g.mx, g.mz, g.my}); }

// {level, xRange, zRange, yRange, grid} records for plot overlays and debugging
inline json partition_to_json(const HierarchySpec& spec) {
    json out = json::array();
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        if (!spec.levels[l].active) continue;
        const auto& tb = spec.levels[l].block;
        out.push_back({{"level", l},
                       {"xRange", range_to_json(tb.x)},
                       {"zRange", range_to_json(tb.z)},
                       {"yRange", range_to_json(tb.y)},
                       {"grid", grid_to_json(spec.levels[l].batch.spec.grid)}});
    }
    return out;
}

// {worker, slot, level, point, aDims, bDims} records per scheduled subtask
inline json schedules_to_json(const HierarchySpec& spec) {
    json out = json::array();
    for (const auto& ws : spec.schedules)
        for (const auto& st : ws.subtasks)
            out.push_back({{"worker", ws.worker},
                           {"slot", st.slot},
                           {"level", st.level},
                           {"point", st.task.point},
                           {"aDims", json::array({st.task.aHat->rows(), st.task.aHat->cols()})},
                           {"bDims", json::array({st.task.bHat->rows(), st.task.bHat->cols()})}});
    return out;
}

inline json report_to_json(const RunReport& r) {
    json out;
    out["phases"] = {{"encode", r.phaseTimes.encode},
                     {"distribute", r.phaseTimes.distribute},
                     {"compute", r.phaseTimes.compute},
                     {"aggregate", r.phaseTimes.aggregate},
                     {"decode", r.phaseTimes.decode}};
    out["perWorkerComputeSeconds"] = r.perWorkerComputeSeconds;
    out["relError"] = r.relError;
    out["stragglers"] = r.stragglers;
    out["received"] = r.received;
    out["illConditioned"] = r.illConditioned;
    out["maxCondition"] = r.maxCondition;
    out["totalSeconds"] = r.totalSeconds;
    out["completions"] = r.completionLog.size();
    return out;
}

inline void write_completion_log_csv(const RunReport& r, std::ostream& os) {
    os << "# schema=1\n";
    os << "time_s,worker,level,slot\n";
    for (const auto& rec : r.completionLog)
        os << rec.timeSeconds << ',' << rec.worker << ',' << rec.level << ',' << rec.slot
           << '\n';
}

// Encoded task set: one binary matrix file per factor plus a JSON manifest
// {taskId, point, level} with the file names.
inline void write_task_manifest(const EncodedBatch& batch, const std::filesystem::path& dir,
                                std::size_t level = 0) {
    std::filesystem::create_directories(dir);
    json manifest = json::array();
    for (const auto& t : batch.tasks) {
        const std::string aName = "task" + std::to_string(t.taskId) + "_a.mat";
        const std::string bName = "task" + std::to_string(t.taskId) + "_b.mat";
        save_matrix(*t.aHat, (dir / aName).string());
        save_matrix(*t.bHat, (dir / bName).string());
        manifest.push_back({{"taskId", t.taskId},
                            {"point", t.point},
                            {"level", level},
                            {"a", aName},
                            {"b", bName}});
    }
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump(2) << '\n';
}

}  // namespace hiercc
