#include <doctest.h>

#include "igt/scenario.hpp"
#include "scenario_builder.hpp"

using namespace igt;

namespace {

json minimal_json() {
    return json{
        {"schema_version", 1},
        {"name", "mini"},
        {"seed", 42},
        {"duration_days", 10.0},
        {"pipelines", {{"sim", {{"stages", {"CMKIN", "CMSIM"}}}}}},
        {"requests", json::array({{{"id", "r1"}, {"events", 500}, {"pipeline", "sim"}}})},
        {"sites", json::array({{{"name", "farm"},
                                {"worker_cpus", 4},
                                {"cpu_speed_ghz", 1.0}}})},
    };
}

} // namespace

TEST_CASE("a minimal scenario parses with defaults") {
    auto result = parse_scenario(minimal_json().dump());
    REQUIRE(result.ok());
    const Scenario& sc = *result.scenario;
    CHECK(sc.name == "mini");
    CHECK(sc.seed == 42);
    CHECK(sc.requests.size() == 1);
    CHECK(sc.requests[0].chunk_size == 250);
    CHECK(sc.masters.size() == 1); // default master injected
    CHECK(sc.retry.max_attempts == 5);
    CHECK(sc.ftsh.spec.timeout_s == 300.0);
    CHECK(sc.channel_defaults.bandwidth_mb_s == 10.0);
    CHECK_FALSE(sc.vo.groups.empty());
    auto pipeline = sc.build_pipeline("sim");
    CHECK(pipeline.stages.size() == 2);
}

TEST_CASE("missing seed is a validation error") {
    json j = minimal_json();
    j.erase("seed");
    auto result = parse_scenario(j.dump());
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& e : result.errors)
        if (e.find("scenario.seed") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("negative bandwidth names the offending field") {
    json j = minimal_json();
    j["channels"]["defaults"]["bandwidth_mb_s"] = -3.0;
    auto result = parse_scenario(j.dump());
    CHECK_FALSE(result.ok());
    bool found = false;
    for (const auto& e : result.errors)
        if (e.find("channels.defaults.bandwidth_mb_s") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("unknown references are named") {
    json j = minimal_json();
    j["requests"][0]["pipeline"] = "nope";
    j["outages"] = json::array({{{"site", "atlantis"}, {"start_day", 1.0}, {"end_day", 2.0}}});
    j["monitor"] = {{"tracked_request", "ghost"}};
    auto result = parse_scenario(j.dump());
    CHECK_FALSE(result.ok());
    CHECK(result.errors.size() >= 3);
}

TEST_CASE("malformed json reports line and column") {
    auto result = parse_scenario("{\n  \"schema_version\": 1,\n  oops\n}");
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].find("line 3") != std::string::npos);
}

TEST_CASE("scenario round-trips through serialization") {
    Scenario sc = test::base_scenario();
    sc.outages.push_back({"*", 2.0, 3.0, "window"});
    sc.channel_overrides["farm"] = {55.0, 0.5};
    sc.submission.push_back({"req", 0.5, 12.0});
    sc.failures.transfer_hang_probability = 0.01;
    sc.monitor.ceiling_events_per_day = 45000.0;
    sc.monitor.tracked_request = "req";

    json first = scenario_to_json(sc);
    auto reparsed = parse_scenario(first.dump(2));
    REQUIRE(reparsed.ok());
    json second = scenario_to_json(*reparsed.scenario);
    CHECK(first == second);
}

TEST_CASE("probabilities outside [0,1] are rejected") {
    json j = minimal_json();
    j["failures"] = {{"transfer_hang_probability", 1.5}};
    auto result = parse_scenario(j.dump());
    CHECK_FALSE(result.ok());
}

TEST_CASE("pipeline stage order is enforced at build time") {
    json j = minimal_json();
    j["pipelines"]["bad"] = {{"stages", {"CMSIM", "CMKIN"}}};
    auto result = parse_scenario(j.dump());
    REQUIRE(result.ok()); // order is a semantic property of the build
    CHECK_THROWS(result.scenario->build_pipeline("bad"));
}

TEST_CASE("unknown stages are parse errors") {
    json j = minimal_json();
    j["pipelines"]["bad"] = {{"stages", {"CMKIN", "warpDrive"}}};
    auto result = parse_scenario(j.dump());
    CHECK_FALSE(result.ok());
}
