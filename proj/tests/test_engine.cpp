#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "igt/engine.hpp"
#include "scenario_builder.hpp"

using namespace igt;

namespace {

CampaignResult run_engine(const Scenario& sc, std::vector<LogRecord>* records = nullptr,
                          std::ostream* log = nullptr) {
    EngineOptions opt;
    opt.keep_records = records != nullptr;
    opt.event_log = log;
    CampaignEngine engine(sc, opt);
    auto result = engine.run();
    if (records) *records = engine.records();
    return result;
}

} // namespace

TEST_CASE("a clean campaign completes every job exactly once") {
    Scenario sc = test::base_scenario();
    sc.requests[0].events = 2000; // 8 jobs on 8 CPUs
    auto result = run_engine(sc);
    REQUIRE(result.requests.size() == 1);
    CHECK(result.requests[0].jobs == 8);
    CHECK(result.requests[0].jobs_completed == 8);
    CHECK(result.requests[0].jobs_abandoned == 0);
    CHECK(result.requests[0].jobs_truncated == 0);
    CHECK(result.requests[0].events_completed == 2000);
    CHECK(result.wasted_cpu_seconds == 0.0);
    CHECK(result.replicas.size() == 8);
    // Useful CPU equals the job-cost arithmetic: 2000 events full chain at
    // 0.75 reference = 264.825 GHz-s/event.
    CHECK(result.requests[0].useful_ghz_seconds == doctest::Approx(2000 * 264.825).epsilon(1e-9));
}

TEST_CASE("batch admission is FIFO and work-conserving") {
    Scenario sc = test::base_scenario();
    sc.pipelines["one"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 41 * 250, "one", 250}; // 41 identical jobs
    sc.sites[0].worker_cpus = 40;
    std::vector<LogRecord> records;
    auto result = run_engine(sc, &records);
    CHECK(result.requests[0].jobs_completed == 41);

    // Stage-ins are identical so they finish together; 40 runs start at that
    // instant, the 41st waits for the first completion.
    std::vector<double> run_starts;
    std::vector<double> run_completes;
    for (const auto& r : records) {
        if (r.type != LogRecord::Type::Node || r.node != 1) continue;
        if (r.to == NodeState::Running) run_starts.push_back(r.t);
        if (r.from == NodeState::Running && r.to == NodeState::Completed)
            run_completes.push_back(r.t);
    }
    REQUIRE(run_starts.size() == 41);
    std::sort(run_starts.begin(), run_starts.end());
    CHECK(run_starts[0] == run_starts[39]); // first 40 start together
    CHECK(run_starts[40] > run_starts[39]);
    // Work conservation: the queued run starts exactly at the first completion.
    std::sort(run_completes.begin(), run_completes.end());
    CHECK(run_starts[40] == run_completes[0]);
}

TEST_CASE("run durations scale with site clock speed") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMKIN", "CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 250, "sim", 250};
    sc.sites[0].cpu_speed_ghz = 2.4;
    std::vector<LogRecord> records;
    run_engine(sc, &records);
    // CMSIM run node (index 2): 350 * 250 * (0.75/2.4) = 27343.75 s.
    double start = -1, end = -1;
    for (const auto& r : records) {
        if (r.type != LogRecord::Type::Node || r.node != 2) continue;
        if (r.to == NodeState::Running) start = r.t;
        if (r.from == NodeState::Running && r.to == NodeState::Completed) end = r.t;
    }
    REQUIRE(start >= 0);
    REQUIRE(end >= 0);
    CHECK(end - start == doctest::Approx(27343.75).epsilon(1e-12));
}

TEST_CASE("submission admission contract") {
    Scenario sc = test::base_scenario();
    CampaignEngine engine(sc);
    JobSpec spec;
    spec.job_id = "probe-j1";
    spec.request_id = "probe";
    spec.events = {1, 250};
    spec.pipeline = sc.build_pipeline("chain");
    Dag dag = wrap_job(spec, StageInMode::PreInstalled);

    CHECK(engine.check_submission(dag, "farm", "m1").accepted);
    CHECK_FALSE(engine.check_submission(dag, "nowhere", "m1").accepted);
    CHECK_FALSE(engine.check_submission(dag, "farm", "m9").accepted);

    Dag broken = dag;
    broken.edges.emplace_back(static_cast<int>(broken.nodes.size()) - 1, 0);
    CHECK_FALSE(engine.check_submission(broken, "farm", "m1").accepted);
}

TEST_CASE("jobs alternate across masters") {
    Scenario sc = test::base_scenario();
    sc.masters = {{"m1", 400}, {"m2", 400}};
    sc.requests[0].events = 1500; // 6 jobs -> 3 per master
    auto result = run_engine(sc);
    REQUIRE(result.masters.size() == 2);
    CHECK(result.masters[0].jobs_assigned == 3);
    CHECK(result.masters[1].jobs_assigned == 3);
}

TEST_CASE("register_replicas is an end-of-campaign operation") {
    Scenario sc = test::base_scenario();
    CampaignEngine engine(sc);
    // Before the run the catalog is empty.
    CHECK(engine.register_replicas().empty());
    auto result = engine.run();
    CHECK(engine.register_replicas().size() == result.replicas.size());
    CHECK(result.replicas.size() == 4);
    CHECK(result.replicas[0].file_count == 5);
    CHECK(result.replicas[0].total_mb == doctest::Approx(850.0));
}

TEST_CASE("master capacity defers dispatch and records saturation") {
    Scenario sc = test::base_scenario();
    sc.pipelines["one"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 500 * 250, "one", 250}; // 500 jobs
    sc.sites[0].worker_cpus = 600;
    sc.masters = {{"m1", 400}};
    sc.channel_defaults = {1e6, 0.0}; // near-instant stage-in
    sc.stage_in.helper_mb = 0.0;
    sc.duration_days = 40.0;
    auto result = run_engine(sc);
    CHECK(result.requests[0].jobs_completed == 500);
    REQUIRE(result.masters.size() == 1);
    CHECK(result.masters[0].max_concurrent_tracked == 400);
    CHECK(result.masters[0].saturation_incidents >= 1);
    CHECK(result.grid_max_concurrent_tracked == 400);
}

TEST_CASE("two masters with a 50/50 split reach twice the concurrency") {
    Scenario sc = test::base_scenario();
    sc.pipelines["one"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 500 * 250, "one", 250};
    sc.sites[0].worker_cpus = 600;
    sc.masters = {{"m1", 400}, {"m2", 400}};
    sc.channel_defaults = {1e6, 0.0};
    sc.stage_in.helper_mb = 0.0;
    sc.duration_days = 40.0;
    auto result = run_engine(sc);
    CHECK(result.requests[0].jobs_completed == 500);
    CHECK(result.masters[0].max_concurrent_tracked == 250);
    CHECK(result.masters[1].max_concurrent_tracked == 250);
    CHECK(result.grid_max_concurrent_tracked == 500);
    CHECK(result.masters[0].saturation_incidents == 0);
    CHECK(result.masters[1].saturation_incidents == 0);
}

TEST_CASE("an outage kills running work and the master recovers it") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 8 * 250, "sim", 250};
    // CMSIM on 1 GHz: 65625 s/job (~0.76 days). Outage hits mid-run.
    sc.outages.push_back({"farm", 0.5, 1.0, "power"});
    sc.failures.lost_contact_detection_delay_s = 600.0;
    std::vector<LogRecord> records;
    auto result = run_engine(sc, &records);
    CHECK(result.requests[0].jobs_completed == 8);
    CHECK(result.wasted_killed_s > 0.0);
    // All 8 runs were mid-flight at the outage: 8 kill-loss transitions.
    int losses = 0;
    for (const auto& r : records)
        if (r.type == LogRecord::Type::Node && r.to == NodeState::Failed &&
            r.cause == std::string(cause::kOutageKill))
            ++losses;
    CHECK(losses == 8);
    // Campaign event totals are exact despite the kills.
    CHECK(result.requests[0].events_completed == 2000);
}

TEST_CASE("an outage on an idle site only blocks admissions") {
    Scenario sc = test::base_scenario();
    sc.requests[0].events = 0; // nothing to do
    sc.outages.push_back({"farm", 0.1, 0.2, "idle-outage"});
    auto result = run_engine(sc);
    CHECK(result.wasted_cpu_seconds == 0.0);
    CHECK(result.requests[0].jobs == 0);
}

TEST_CASE("lost contact produces a counted completion and wasted duplicate time") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 20 * 250, "sim", 250};
    sc.sites[0].worker_cpus = 10;
    sc.failures.lost_contact_probability = 0.5;
    sc.failures.lost_contact_detection_delay_s = 600.0;
    sc.retry.max_attempts = 50;
    sc.duration_days = 60.0;
    std::vector<LogRecord> records;
    auto result = run_engine(sc, &records);
    CHECK(result.requests[0].jobs_completed == 20);
    CHECK(result.requests[0].events_completed == 20 * 250); // no double counting
    CHECK(result.wasted_superseded_s > 0.0);
    int duplicates = 0;
    for (const auto& r : records)
        if (r.type == LogRecord::Type::Duplicate) ++duplicates;
    CHECK(duplicates > 0);
    // Useful cycles equal the exact per-request arithmetic even with restarts.
    CHECK(result.requests[0].useful_ghz_seconds ==
          doctest::Approx(20 * 250 * 350.0 * 0.75).epsilon(1e-9));
}

TEST_CASE("a disk too small for one job loops and is flagged") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 250, "sim", 250};
    sc.sites[0].disk_mb = 100.0; // CMSIM writes 500 MB
    sc.retry.unbounded = true;
    sc.retry.loop_threshold = 3;
    sc.duration_days = 40.0;
    std::vector<LogRecord> records;
    auto result = run_engine(sc, &records);
    CHECK(result.requests[0].jobs_completed == 0);
    CHECK(result.retry_loops_flagged == 1);
    bool loop_logged = false;
    for (const auto& r : records)
        if (r.type == LogRecord::Type::RetryLoop && r.cause == std::string(cause::kDiskFull))
            loop_logged = true;
    CHECK(loop_logged);
    // Unbounded retries: the node never abandons, the horizon truncates it.
    CHECK(result.requests[0].jobs_truncated == 1);
    CHECK(result.wasted_failed_s > 0.0);
}

TEST_CASE("bounded retries abandon after max attempts and cleanup still runs") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 250, "sim", 250};
    sc.sites[0].disk_mb = 100.0;
    sc.retry.max_attempts = 4;
    sc.duration_days = 40.0;
    std::vector<LogRecord> records;
    auto result = run_engine(sc, &records);
    CHECK(result.requests[0].jobs_abandoned == 1);
    CHECK(result.requests[0].jobs_truncated == 0);
    CHECK(result.requests[0].events_completed == 0);
    // The cleanup node completed even though the chain failed.
    bool cleanup_completed = false;
    for (const auto& r : records)
        if (r.type == LogRecord::Type::Node && r.node == 3 && r.to == NodeState::Completed)
            cleanup_completed = true;
    CHECK(cleanup_completed);
    int run_attempts = 0;
    for (const auto& r : records)
        if (r.type == LogRecord::Type::Node && r.node == 1 && r.to == NodeState::Dispatched)
            ++run_attempts;
    CHECK(run_attempts == 4);
}

TEST_CASE("ftsh-wrapped transfer rides out a hang; unwrapped blocks forever") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMKIN"}, 0.0, {}};
    sc.requests[0] = {"req", 250, "sim", 250};
    sc.failures.hang_attempt_probabilities = {1.0, 0.0}; // first attempt hangs
    sc.channel_defaults = {10.0, 1.0};
    sc.stage_in.helper_mb = 100.0;
    sc.ftsh.spec = RetrySpec{300.0, 5, 0.0};
    sc.duration_days = 2.0;

    SUBCASE("wrapped") {
        std::vector<LogRecord> records;
        auto result = run_engine(sc, &records);
        CHECK(result.requests[0].jobs_completed == 1);
        // Stage-in completes at exactly timeout + second attempt duration.
        double stagein_done = -1;
        for (const auto& r : records)
            if (r.type == LogRecord::Type::Node && r.node == 0 && r.to == NodeState::Completed)
                stagein_done = r.t;
        CHECK(stagein_done == doctest::Approx(300.0 + 1.0 + 100.0 / 10.0).epsilon(1e-12));
    }
    SUBCASE("unwrapped") {
        sc.ftsh.enabled = false;
        auto result = run_engine(sc);
        CHECK(result.requests[0].jobs_completed == 0);
        CHECK(result.requests[0].jobs_truncated == 1);
        CHECK(result.requests[0].events_completed == 0);
    }
}

TEST_CASE("authorization gates dispatch until the directory syncs") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMKIN"}, 0.0, {}};
    sc.requests[0] = {"req", 250, "sim", 250};
    // The submitting DN belongs to no group: every dispatch denied.
    sc.vo.users.push_back({"/CN=Uncleared Operator", CertificateAuthority::Globus, {}});
    sc.vo.request_dns["req"] = "/CN=Uncleared Operator";
    sc.duration_days = 1.0;
    std::vector<LogRecord> records;
    auto result = run_engine(sc, &records);
    CHECK(result.auth_denials > 0);
    CHECK(result.requests[0].jobs_completed == 0);
    bool denied = false;
    for (const auto& r : records)
        if (r.type == LogRecord::Type::AuthDenied) denied = true;
    CHECK(denied);
}

TEST_CASE("every dispatch in a normal campaign is authorized") {
    Scenario sc = test::base_scenario();
    sc.requests[0].events = 1000;
    std::vector<LogRecord> records;
    run_engine(sc, &records);
    UserDirectory dir;
    for (const auto& g : sc.vo.groups) dir.create_group(g.name, g.account);
    for (const auto& u : sc.vo.users) {
        GridUser gu{u.dn, u.ca, {}};
        for (const auto& g : u.groups) dir.add_user(gu, g);
    }
    auto snapshot = GridmapSnapshot::from_directory(dir);
    int dispatches = 0;
    for (const auto& r : records) {
        if (r.type != LogRecord::Type::Node || r.to != NodeState::Dispatched) continue;
        ++dispatches;
        REQUIRE_FALSE(r.dn.empty());
        auto account = snapshot.authorize(r.dn);
        REQUIRE(account.has_value());
        CHECK(*account == r.account);
    }
    CHECK(dispatches == 4 * 8); // 4 jobs x 8 nodes
}

TEST_CASE("identical seeds replay identical logs, different seeds diverge") {
    Scenario sc = test::base_scenario();
    sc.pipelines["sim"] = PipelineConfig{{"CMKIN", "CMSIM"}, 0.0, {}};
    sc.requests[0] = {"req", 12 * 250, "sim", 250};
    sc.failures.transfer_hang_probability = 0.2;
    sc.failures.lost_contact_probability = 0.2;
    sc.failures.lost_contact_detection_delay_s = 900.0;
    sc.duration_days = 45.0;

    auto run_to_text = [&](std::uint64_t seed) {
        Scenario copy = sc;
        copy.seed = seed;
        std::ostringstream log;
        run_engine(copy, nullptr, &log);
        return log.str();
    };
    std::string a = run_to_text(11);
    std::string b = run_to_text(11);
    std::string c = run_to_text(12);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("monitor collect reflects live site state") {
    Scenario sc = test::base_scenario();
    CampaignEngine engine(sc);
    auto sample = engine.collect("farm");
    CHECK(sample.cpus_busy == 0);
    CHECK(sample.events_completed_cumulative == 0);
    CHECK_THROWS_AS(engine.collect("atlantis"), std::invalid_argument);
}

TEST_CASE("samples and completions reconcile with executor totals") {
    Scenario sc = test::base_scenario();
    sc.requests[0].events = 1000;
    auto result = run_engine(sc);
    // Last sample's cumulative events equal the request totals.
    std::map<std::string, long long> last_events;
    for (const auto& s : result.samples) last_events[s.site] = s.events_completed_cumulative;
    long long total = 0;
    for (const auto& [site, events] : last_events) total += events;
    CHECK(total == result.total_events_completed());
    // Progress (cumulative completions) is monotone.
    long long seen = 0;
    for (const auto& c : result.completions) {
        CHECK(c.events > 0);
        seen += c.events;
    }
    CHECK(seen == total);
}
