/*
 * Copyright 2026 The igtsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "igt/workload.hpp"

namespace igt {

enum class NodeKind { StageIn, Run, StageOut, Cleanup };

inline const char* to_string(NodeKind k) {
    switch (k) {
    case NodeKind::StageIn: return "StageIn";
    case NodeKind::Run: return "Run";
    case NodeKind::StageOut: return "StageOut";
    case NodeKind::Cleanup: return "Cleanup";
    }
    return "?";
}

struct FileSpec {
    std::string name;
    double size_mb = 0.0;
};

/// One node of a wrapped job. Run nodes carry the stage they execute;
/// StageIn/StageOut nodes carry the file set they move.
struct DagNode {
    std::string node_id;
    NodeKind kind = NodeKind::Run;
    int stage_index = -1; // Run nodes: index into the job's pipeline
    std::string stage_name;
    std::vector<FileSpec> files;
    int attempt_count = 0;

    double total_file_mb() const {
        double total = 0.0;
        for (const auto& f : files) total += f.size_mb;
        return total;
    }
};

/// Dependency graph wrapping one job: nodes plus parent->child edges.
/// Values are immutable once built; run state lives in the executor.
struct Dag {
    std::string job_id;
    std::vector<DagNode> nodes;
    std::vector<std::pair<int, int>> edges; // (parent index, child index)

    int index_of(const std::string& node_id) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].node_id == node_id) return static_cast<int>(i);
        return -1;
    }

    std::vector<int> parents_of(int node) const {
        std::vector<int> out;
        for (const auto& [p, c] : edges)
            if (c == node) out.push_back(p);
        return out;
    }

    std::vector<int> children_of(int node) const {
        std::vector<int> out;
        for (const auto& [p, c] : edges)
            if (p == node) out.push_back(c);
        return out;
    }
};

/// Whether the application distribution travels with every job or was
/// installed at the sites beforehand.
enum class StageInMode { PerJob, PreInstalled };

struct StageInSizing {
    double helper_mb = 5.0;           // per-job runtime helper files
    double app_distribution_mb = 500.0; // full application bundle (PerJob mode)
};

/// Wraps a job as a linear DAG: StageIn -> Run(stage 1) ... Run(stage k)
/// -> StageOut -> Cleanup. StageOut returns every stage's output to the
/// submit site; Cleanup removes leftover state from the worker site.
inline Dag wrap_job(const JobSpec& job, StageInMode mode, const StageInSizing& sizing = {}) {
    if (job.pipeline.stages.empty())
        throw std::invalid_argument("cannot wrap a job with an empty pipeline");

    Dag dag;
    dag.job_id = job.job_id;
    long long events = job.event_count();

    DagNode in;
    in.node_id = job.job_id + ".stagein";
    in.kind = NodeKind::StageIn;
    in.files.push_back({"helpers.tar", sizing.helper_mb});
    if (mode == StageInMode::PerJob)
        in.files.push_back({"appdist.tar", sizing.app_distribution_mb});
    dag.nodes.push_back(std::move(in));

    for (std::size_t i = 0; i < job.pipeline.stages.size(); ++i) {
        const StageProfile& s = job.pipeline.stages[i];
        DagNode run;
        run.node_id = job.job_id + ".run" + std::to_string(i + 1) + "-" + s.name;
        run.kind = NodeKind::Run;
        run.stage_index = static_cast<int>(i);
        run.stage_name = s.name;
        dag.nodes.push_back(std::move(run));
    }

    DagNode out;
    out.node_id = job.job_id + ".stageout";
    out.kind = NodeKind::StageOut;
    for (const auto& s : job.pipeline.stages)
        out.files.push_back({s.name + ".out", s.output_per_event_mb * static_cast<double>(events)});
    dag.nodes.push_back(std::move(out));

    DagNode clean;
    clean.node_id = job.job_id + ".cleanup";
    clean.kind = NodeKind::Cleanup;
    dag.nodes.push_back(std::move(clean));

    for (int i = 0; i + 1 < static_cast<int>(dag.nodes.size()); ++i)
        dag.edges.emplace_back(i, i + 1);
    return dag;
}

struct DagValidation {
    bool ok = true;
    std::string violation; // first violated rule, empty when ok
};

/// Structural check: acyclicity, unique parentless StageIn root, unique
/// childless Cleanup leaf, StageOut feeding Cleanup and depending on the
/// final Run, every Run reachable from StageIn. Reports the first violation
/// instead of aborting.
inline DagValidation validate_dag(const Dag& dag) {
    auto fail = [](std::string why) { return DagValidation{false, std::move(why)}; };
    const int n = static_cast<int>(dag.nodes.size());

    for (const auto& [p, c] : dag.edges)
        if (p < 0 || p >= n || c < 0 || c >= n) return fail("edge references unknown node");

    // Kahn's algorithm for acyclicity.
    std::vector<int> indeg(n, 0);
    for (const auto& [p, c] : dag.edges) {
        (void)p;
        indeg[c]++;
    }
    std::vector<int> order;
    std::vector<int> frontier;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) frontier.push_back(i);
    std::vector<int> deg = indeg;
    while (!frontier.empty()) {
        int v = frontier.back();
        frontier.pop_back();
        order.push_back(v);
        for (const auto& [p, c] : dag.edges) {
            if (p == v && --deg[c] == 0) frontier.push_back(c);
        }
    }
    if (static_cast<int>(order.size()) != n) return fail("cycle detected");

    int stage_in = -1, cleanup = -1, stage_out = -1;
    for (int i = 0; i < n; ++i) {
        switch (dag.nodes[i].kind) {
        case NodeKind::StageIn:
            if (stage_in >= 0) return fail("more than one StageIn node");
            stage_in = i;
            break;
        case NodeKind::Cleanup:
            if (cleanup >= 0) return fail("more than one Cleanup node");
            cleanup = i;
            break;
        case NodeKind::StageOut:
            if (stage_out >= 0) return fail("more than one StageOut node");
            stage_out = i;
            break;
        case NodeKind::Run:
            break;
        }
    }
    if (stage_in < 0) return fail("missing StageIn node");
    if (cleanup < 0) return fail("missing Cleanup node");
    if (stage_out < 0) return fail("missing StageOut node");
    if (!dag.parents_of(stage_in).empty()) return fail("StageIn has parents");
    if (!dag.children_of(cleanup).empty()) return fail("Cleanup has children");
    for (int i = 0; i < n; ++i) {
        if (i != stage_in && dag.parents_of(i).empty()) return fail("second root besides StageIn");
        if (i != cleanup && dag.children_of(i).empty()) return fail("second leaf besides Cleanup");
    }

    bool out_to_clean = false;
    for (const auto& [p, c] : dag.edges)
        if (p == stage_out && c == cleanup) out_to_clean = true;
    if (!out_to_clean) return fail("StageOut does not feed Cleanup");

    // StageOut must depend on the last Run node.
    int last_run = -1;
    for (int v : order)
        if (dag.nodes[v].kind == NodeKind::Run) last_run = v;
    if (last_run >= 0) {
        bool found = false;
        for (int p : dag.parents_of(stage_out))
            if (p == last_run) found = true;
        if (!found) return fail("StageOut does not depend on the final Run node");
    }

    // Reachability of every Run node from StageIn.
    std::vector<bool> reach(n, false);
    std::vector<int> stack{stage_in};
    reach[stage_in] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int c : dag.children_of(v)) {
            if (!reach[c]) {
                reach[c] = true;
                stack.push_back(c);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (dag.nodes[i].kind == NodeKind::Run && !reach[i])
            return fail("Run node unreachable from StageIn");

    return {};
}

/// Nodes whose parents are all completed and which are not completed
/// themselves. `completed` must reference known nodes.
inline std::set<std::string> ready_nodes(const Dag& dag, const std::set<std::string>& completed) {
    std::set<int> done;
    for (const auto& id : completed) {
        int idx = dag.index_of(id);
        if (idx < 0) throw std::invalid_argument("unknown node in completed set: " + id);
        done.insert(idx);
    }
    std::set<std::string> ready;
    for (int i = 0; i < static_cast<int>(dag.nodes.size()); ++i) {
        if (done.count(i)) continue;
        bool all_parents_done = true;
        for (int p : dag.parents_of(i))
            if (!done.count(p)) all_parents_done = false;
        if (all_parents_done) ready.insert(dag.nodes[i].node_id);
    }
    return ready;
}

/// Line-oriented debug form: one NODE line per node (id, kind, payload
/// summary), one EDGE line per edge, in construction order.
inline std::string dag_to_text(const Dag& dag) {
    std::string out;
    char buf[64];
    for (const auto& node : dag.nodes) {
        out += "NODE " + node.node_id + " " + to_string(node.kind);
        if (node.kind == NodeKind::Run) {
            out += " stage=" + node.stage_name;
        } else if (node.kind == NodeKind::StageIn || node.kind == NodeKind::StageOut) {
            std::snprintf(buf, sizeof buf, " files=%zu mb=%.3f", node.files.size(),
                          node.total_file_mb());
            out += buf;
        }
        out += "\n";
    }
    for (const auto& [p, c] : dag.edges)
        out += "EDGE " + dag.nodes[p].node_id + " " + dag.nodes[c].node_id + "\n";
    return out;
}

} // namespace igt
