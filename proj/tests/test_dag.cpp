#include <doctest.h>

#include <algorithm>

#include "igt/dag.hpp"

using namespace igt;

namespace {

JobSpec make_job(const std::vector<std::string>& stages, long long events = 250) {
    JobSpec j;
    j.job_id = "req-j01";
    j.request_id = "req";
    j.events = {1, events};
    for (const auto& s : stages) j.pipeline.stages.push_back(stage_profile(s));
    return j;
}

const std::vector<std::string> kFullChain = {"CMKIN", "CMSIM", "writeHits", "writeDigisNoPU",
                                             "ntuple"};

// Brute-force oracle: enumerate every path from roots and check the graph is
// one simple chain covering all nodes.
bool is_linear_chain(const Dag& dag) {
    int n = static_cast<int>(dag.nodes.size());
    std::vector<int> roots;
    for (int i = 0; i < n; ++i)
        if (dag.parents_of(i).empty()) roots.push_back(i);
    if (roots.size() != 1) return false;
    int seen = 0, v = roots[0];
    while (true) {
        ++seen;
        auto kids = dag.children_of(v);
        if (kids.empty()) break;
        if (kids.size() != 1) return false;
        v = kids[0];
    }
    return seen == n;
}

} // namespace

TEST_CASE("wrap_job builds the k+3 node linear DAG") {
    // Full chain: 1 StageIn + 5 Run + 1 StageOut + 1 Cleanup = 8 nodes, 7 edges.
    Dag dag = wrap_job(make_job(kFullChain), StageInMode::PreInstalled);
    CHECK(dag.nodes.size() == 8);
    CHECK(dag.edges.size() == 7);
    CHECK(is_linear_chain(dag));
    CHECK(validate_dag(dag).ok);

    int runs = 0, ins = 0, outs = 0, cleans = 0;
    for (const auto& node : dag.nodes) {
        switch (node.kind) {
        case NodeKind::Run: ++runs; break;
        case NodeKind::StageIn: ++ins; break;
        case NodeKind::StageOut: ++outs; break;
        case NodeKind::Cleanup: ++cleans; break;
        }
    }
    CHECK(runs == 5);
    CHECK(ins == 1);
    CHECK(outs == 1);
    CHECK(cleans == 1);

    Dag simonly = wrap_job(make_job({"CMKIN", "CMSIM"}), StageInMode::PreInstalled);
    CHECK(simonly.nodes.size() == 5);
    CHECK(simonly.edges.size() == 4);
    CHECK(validate_dag(simonly).ok);

    CHECK_THROWS(wrap_job(make_job({}), StageInMode::PreInstalled));
}

TEST_CASE("stage-in payload depends on the installation mode") {
    StageInSizing sizing{5.0, 500.0};
    Dag pre = wrap_job(make_job(kFullChain), StageInMode::PreInstalled, sizing);
    Dag per = wrap_job(make_job(kFullChain), StageInMode::PerJob, sizing);
    CHECK(pre.nodes[0].total_file_mb() == doctest::Approx(5.0));
    CHECK(per.nodes[0].total_file_mb() == doctest::Approx(505.0));

    // Stage-out carries every stage's output: 850 MB for 250 full-chain events.
    const DagNode& out = per.nodes[per.nodes.size() - 2];
    REQUIRE(out.kind == NodeKind::StageOut);
    CHECK(out.total_file_mb() == doctest::Approx(850.0));
}

TEST_CASE("validate_dag reports the first violated rule") {
    Dag dag = wrap_job(make_job(kFullChain), StageInMode::PreInstalled);
    CHECK(validate_dag(dag).ok);
    // Validation of a passing DAG is stable.
    CHECK(validate_dag(dag).ok);

    SUBCASE("cycle") {
        Dag bad = dag;
        bad.edges.emplace_back(static_cast<int>(bad.nodes.size()) - 1, 0); // Cleanup -> StageIn
        auto v = validate_dag(bad);
        CHECK_FALSE(v.ok);
        CHECK(v.violation == "cycle detected");
    }
    SUBCASE("missing cleanup") {
        Dag bad = dag;
        bad.nodes.pop_back();
        bad.edges.pop_back();
        auto v = validate_dag(bad);
        CHECK_FALSE(v.ok);
        CHECK(v.violation == "missing Cleanup node");
    }
    SUBCASE("two roots") {
        Dag bad = dag;
        // Orphan the second run node.
        bad.edges.erase(bad.edges.begin() + 1);
        auto v = validate_dag(bad);
        CHECK_FALSE(v.ok);
    }
}

TEST_CASE("ready_nodes releases the unique next node of the chain") {
    Dag dag = wrap_job(make_job(kFullChain), StageInMode::PreInstalled);

    auto r0 = ready_nodes(dag, {});
    REQUIRE(r0.size() == 1);
    CHECK(*r0.begin() == "req-j01.stagein");

    auto r1 = ready_nodes(dag, {"req-j01.stagein"});
    REQUIRE(r1.size() == 1);
    CHECK(*r1.begin() == "req-j01.run1-CMKIN");

    std::set<std::string> all_but_cleanup;
    for (const auto& n : dag.nodes)
        if (n.kind != NodeKind::Cleanup) all_but_cleanup.insert(n.node_id);
    auto r2 = ready_nodes(dag, all_but_cleanup);
    REQUIRE(r2.size() == 1);
    CHECK(*r2.begin() == "req-j01.cleanup");

    CHECK_THROWS_AS(ready_nodes(dag, {"nonexistent"}), std::invalid_argument);
}

TEST_CASE("monotone completion never releases a node twice and is a topological order") {
    Dag dag = wrap_job(make_job(kFullChain), StageInMode::PreInstalled);
    std::set<std::string> completed;
    std::vector<std::string> release_order;
    while (completed.size() < dag.nodes.size()) {
        auto ready = ready_nodes(dag, completed);
        REQUIRE_FALSE(ready.empty());
        for (const auto& id : ready) {
            CHECK(std::find(release_order.begin(), release_order.end(), id) ==
                  release_order.end());
            release_order.push_back(id);
            completed.insert(id);
        }
    }
    // Topological: each node appears after all its parents.
    for (const auto& [p, c] : dag.edges) {
        auto pi = std::find(release_order.begin(), release_order.end(), dag.nodes[p].node_id);
        auto ci = std::find(release_order.begin(), release_order.end(), dag.nodes[c].node_id);
        CHECK(pi < ci);
    }
}

TEST_CASE("dag serializes to NODE/EDGE lines") {
    Dag dag = wrap_job(make_job({"CMKIN", "CMSIM"}), StageInMode::PreInstalled);
    std::string text = dag_to_text(dag);
    CHECK(text ==
          "NODE req-j01.stagein StageIn files=1 mb=5.000\n"
          "NODE req-j01.run1-CMKIN Run stage=CMKIN\n"
          "NODE req-j01.run2-CMSIM Run stage=CMSIM\n"
          "NODE req-j01.stageout StageOut files=2 mb=512.500\n"
          "NODE req-j01.cleanup Cleanup\n"
          "EDGE req-j01.stagein req-j01.run1-CMKIN\n"
          "EDGE req-j01.run1-CMKIN req-j01.run2-CMSIM\n"
          "EDGE req-j01.run2-CMSIM req-j01.stageout\n"
          "EDGE req-j01.stageout req-j01.cleanup\n");
}
