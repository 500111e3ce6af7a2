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

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igt/dag.hpp"
#include "igt/executor.hpp"
#include "igt/ftsh.hpp"
#include "igt/vo.hpp"
#include "igt/workload.hpp"

namespace igt {

using nlohmann::json;

struct SiteConfig {
    std::string name;
    int worker_cpus = 0;
    double cpu_speed_ghz = 1.0;
    std::string os;
    double disk_mb = 200000.0;
    double available_from_day = 0.0;
};

struct ChannelDefaults {
    double bandwidth_mb_s = 10.0;
    double latency_s = 1.0;
};

struct OutageWindow {
    std::string site; // "*" applies to every site
    double start_day = 0.0;
    double end_day = 0.0;
    std::string label;
};

struct FailureConfig {
    double transfer_hang_probability = 0.0;
    /// Optional per-attempt hang schedule; overrides the scalar when present.
    std::vector<double> hang_attempt_probabilities;
    double disk_full_probability = 0.0;
    double lost_contact_probability = 0.0;
    double lost_contact_detection_delay_s = 21600.0;

    std::vector<double> hang_schedule() const {
        if (!hang_attempt_probabilities.empty()) return hang_attempt_probabilities;
        return {transfer_hang_probability};
    }
};

struct RequestConfig {
    std::string id;
    long long events = 0;
    std::string pipeline;
    long long chunk_size = 250;
};

struct PipelineConfig {
    std::vector<std::string> stages;
    double pileup_ratio = 0.0;
    /// Per-stage metadata overrides routed through the stage configurators.
    std::map<std::string, std::map<std::string, std::string>> configure;
};

enum class AssignmentPolicy { CapacityWeighted, RoundRobin, SingleSite };

struct AssignmentConfig {
    AssignmentPolicy policy = AssignmentPolicy::CapacityWeighted;
    std::string single_site; // SingleSite only
};

struct SubmissionPlan {
    std::string request;
    double start_day = 0.0;
    double jobs_per_day = 0.0; // 0 = submit everything at start
};

struct StageInConfig {
    StageInMode mode = StageInMode::PreInstalled;
    double helper_mb = 5.0;
    double app_distribution_mb = 500.0;
};

struct FtshConfig {
    bool enabled = true;
    RetrySpec spec;
};

struct VoUserConfig {
    std::string dn;
    CertificateAuthority ca = CertificateAuthority::DOESG;
    std::vector<std::string> groups;
};

struct VoGroupConfig {
    std::string name;
    std::string account;
};

struct VoConfig {
    double sync_period_hours = 6.0;
    std::vector<VoGroupConfig> groups;
    std::vector<VoUserConfig> users;
    std::map<std::string, std::string> request_dns; // request id -> submitter DN
};

struct MonitorConfig {
    double sample_period_hours = 1.0;
    int windows = 12;
    /// Declared throughput ceiling for efficiency reporting; when absent the
    /// formula value over the configured pipeline and full site roster is used.
    std::optional<double> ceiling_events_per_day;
    /// Request whose completions form the headline progress/efficiency series;
    /// absent means all requests combined.
    std::optional<std::string> tracked_request;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    std::optional<std::uint64_t> seed;
    double duration_days = 0.0;
    std::map<std::string, PipelineConfig> pipelines;
    std::vector<RequestConfig> requests;
    std::vector<SiteConfig> sites;
    ChannelDefaults channel_defaults;
    std::map<std::string, ChannelDefaults> channel_overrides; // by site name
    FailureConfig failures;
    std::vector<OutageWindow> outages;
    std::vector<MasterConfig> masters;
    AssignmentConfig assignment;
    std::vector<SubmissionPlan> submission;
    FtshConfig ftsh;
    RetryPolicy retry;
    StageInConfig stage_in;
    double cleanup_duration_s = 30.0;
    VoConfig vo;
    MonitorConfig monitor;

    const SiteConfig* find_site(const std::string& name_) const {
        for (const auto& s : sites)
            if (s.name == name_) return &s;
        return nullptr;
    }

    const RequestConfig* find_request(const std::string& id) const {
        for (const auto& r : requests)
            if (r.id == id) return &r;
        return nullptr;
    }

    /// Builds a pipeline through the configurator/linker machinery: stages
    /// attach in the configured order, per-stage overrides apply last-wins.
    PipelineSpec build_pipeline(const std::string& id) const {
        auto it = pipelines.find(id);
        if (it == pipelines.end()) throw std::invalid_argument("unknown pipeline: " + id);
        Linker linker;
        for (const auto& stage : it->second.stages) linker.attach(Configurator(stage));
        for (const auto& [stage, kv] : it->second.configure)
            for (const auto& [k, v] : kv) linker.configure(stage, k, v);
        return linker.emit_pipeline(it->second.pileup_ratio);
    }
};

// ---------------------------------------------------------------------------
// Parsing and validation

namespace detail {

class FieldReader {
public:
    explicit FieldReader(std::vector<std::string>& errors) : errors_(errors) {}

    void fail(const std::string& path, const std::string& msg) {
        errors_.push_back(path + ": " + msg);
    }

    bool require_object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "must be an object");
        return false;
    }

    double num(const json& j, const std::string& key, const std::string& path, double fallback,
               bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) fail(path + "." + key, "is required");
            return fallback;
        }
        if (!j.at(key).is_number()) {
            fail(path + "." + key, "must be a number");
            return fallback;
        }
        return j.at(key).get<double>();
    }

    long long integer(const json& j, const std::string& key, const std::string& path,
                      long long fallback, bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) fail(path + "." + key, "is required");
            return fallback;
        }
        if (!j.at(key).is_number_integer()) {
            fail(path + "." + key, "must be an integer");
            return fallback;
        }
        return j.at(key).get<long long>();
    }

    std::string str(const json& j, const std::string& key, const std::string& path,
                    const std::string& fallback, bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) fail(path + "." + key, "is required");
            return fallback;
        }
        if (!j.at(key).is_string()) {
            fail(path + "." + key, "must be a string");
            return fallback;
        }
        return j.at(key).get<std::string>();
    }

    bool boolean(const json& j, const std::string& key, const std::string& path, bool fallback) {
        if (!j.is_object() || !j.contains(key)) return fallback;
        if (!j.at(key).is_boolean()) {
            fail(path + "." + key, "must be a boolean");
            return fallback;
        }
        return j.at(key).get<bool>();
    }

    void check(bool ok, const std::string& path, const std::string& msg) {
        if (!ok) fail(path, msg);
    }

private:
    std::vector<std::string>& errors_;
};

inline std::pair<int, int> line_of_offset(const std::string& text, std::size_t offset) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

struct ScenarioParseResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> errors;
    bool ok() const { return scenario.has_value() && errors.empty(); }
};

inline ScenarioParseResult parse_scenario(const std::string& text) {
    ScenarioParseResult result;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        result.errors.push_back("line " + std::to_string(line) + ", column " +
                                std::to_string(col) + ": " + e.what());
        return result;
    }

    detail::FieldReader r(result.errors);
    Scenario sc;
    if (!r.require_object(root, "scenario")) return result;

    long long version = r.integer(root, "schema_version", "scenario", 1, true);
    r.check(version == 1, "scenario.schema_version", "unsupported version");
    sc.schema_version = static_cast<int>(version);
    sc.name = r.str(root, "name", "scenario", "unnamed");
    if (root.contains("seed") && root.at("seed").is_number_unsigned())
        sc.seed = root.at("seed").get<std::uint64_t>();
    else if (root.contains("seed") && root.at("seed").is_number_integer())
        sc.seed = static_cast<std::uint64_t>(root.at("seed").get<long long>());
    else
        r.fail("scenario.seed", "is required for deterministic runs");
    sc.duration_days = r.num(root, "duration_days", "scenario", 0.0, true);
    r.check(sc.duration_days > 0, "scenario.duration_days", "must be > 0");

    // Pipelines
    if (root.contains("pipelines") && root.at("pipelines").is_object()) {
        for (const auto& [id, body] : root.at("pipelines").items()) {
            PipelineConfig pc;
            std::string path = "pipelines." + id;
            if (body.contains("stages") && body.at("stages").is_array()) {
                for (const auto& s : body.at("stages")) {
                    if (!s.is_string()) {
                        r.fail(path + ".stages", "must be stage-name strings");
                        continue;
                    }
                    std::string stage = s.get<std::string>();
                    if (!find_stage_profile(stage)) r.fail(path + ".stages", "unknown stage " + stage);
                    pc.stages.push_back(stage);
                }
            } else {
                r.fail(path + ".stages", "is required");
            }
            pc.pileup_ratio = r.num(body, "pileup_ratio", path, 0.0);
            r.check(pc.pileup_ratio >= 0, path + ".pileup_ratio", "must be >= 0");
            if (body.contains("configure") && body.at("configure").is_object()) {
                for (const auto& [stage, kv] : body.at("configure").items())
                    for (const auto& [k, v] : kv.items())
                        pc.configure[stage][k] =
                            v.is_string() ? v.get<std::string>() : v.dump();
            }
            sc.pipelines[id] = std::move(pc);
        }
    } else {
        r.fail("scenario.pipelines", "is required");
    }

    // Requests
    if (root.contains("requests") && root.at("requests").is_array()) {
        int i = 0;
        for (const auto& body : root.at("requests")) {
            std::string path = "requests[" + std::to_string(i++) + "]";
            RequestConfig rc;
            rc.id = r.str(body, "id", path, "", true);
            rc.events = r.integer(body, "events", path, 0, true);
            r.check(rc.events >= 0, path + ".events", "must be >= 0");
            rc.pipeline = r.str(body, "pipeline", path, "", true);
            if (!rc.pipeline.empty() && !sc.pipelines.count(rc.pipeline))
                r.fail(path + ".pipeline", "unknown pipeline " + rc.pipeline);
            rc.chunk_size = r.integer(body, "chunk_size", path, 250);
            r.check(rc.chunk_size >= 1, path + ".chunk_size", "must be >= 1");
            if (sc.find_request(rc.id)) r.fail(path + ".id", "duplicate request id " + rc.id);
            sc.requests.push_back(std::move(rc));
        }
    } else {
        r.fail("scenario.requests", "is required");
    }

    // Sites
    if (root.contains("sites") && root.at("sites").is_array()) {
        int i = 0;
        for (const auto& body : root.at("sites")) {
            std::string path = "sites[" + std::to_string(i++) + "]";
            SiteConfig site;
            site.name = r.str(body, "name", path, "", true);
            site.worker_cpus = static_cast<int>(r.integer(body, "worker_cpus", path, 0, true));
            r.check(site.worker_cpus >= 0, path + ".worker_cpus", "must be >= 0");
            site.cpu_speed_ghz = r.num(body, "cpu_speed_ghz", path, 1.0, true);
            r.check(site.cpu_speed_ghz > 0, path + ".cpu_speed_ghz", "must be > 0");
            site.os = r.str(body, "os", path, "");
            site.disk_mb = r.num(body, "disk_mb", path, 200000.0);
            r.check(site.disk_mb >= 0, path + ".disk_mb", "must be >= 0");
            site.available_from_day = r.num(body, "available_from_day", path, 0.0);
            r.check(site.available_from_day >= 0, path + ".available_from_day", "must be >= 0");
            if (sc.find_site(site.name)) r.fail(path + ".name", "duplicate site " + site.name);
            sc.sites.push_back(std::move(site));
        }
    } else {
        r.fail("scenario.sites", "is required");
    }
    r.check(!sc.sites.empty(), "scenario.sites", "at least one site is required");

    // Channels
    if (root.contains("channels")) {
        const json& ch = root.at("channels");
        if (ch.contains("defaults")) {
            sc.channel_defaults.bandwidth_mb_s =
                r.num(ch.at("defaults"), "bandwidth_mb_s", "channels.defaults", 10.0);
            sc.channel_defaults.latency_s =
                r.num(ch.at("defaults"), "latency_s", "channels.defaults", 1.0);
        }
        r.check(sc.channel_defaults.bandwidth_mb_s > 0, "channels.defaults.bandwidth_mb_s",
                "must be > 0");
        r.check(sc.channel_defaults.latency_s >= 0, "channels.defaults.latency_s",
                "must be >= 0");
        if (ch.contains("overrides") && ch.at("overrides").is_object()) {
            for (const auto& [site, body] : ch.at("overrides").items()) {
                std::string path = "channels.overrides." + site;
                if (!sc.find_site(site)) r.fail(path, "unknown site " + site);
                ChannelDefaults cd = sc.channel_defaults;
                cd.bandwidth_mb_s = r.num(body, "bandwidth_mb_s", path, cd.bandwidth_mb_s);
                cd.latency_s = r.num(body, "latency_s", path, cd.latency_s);
                r.check(cd.bandwidth_mb_s > 0, path + ".bandwidth_mb_s", "must be > 0");
                r.check(cd.latency_s >= 0, path + ".latency_s", "must be >= 0");
                sc.channel_overrides[site] = cd;
            }
        }
    }

    // Failures
    if (root.contains("failures")) {
        const json& f = root.at("failures");
        auto prob = [&](const char* key, double fallback) {
            double v = r.num(f, key, "failures", fallback);
            r.check(v >= 0.0 && v <= 1.0, std::string("failures.") + key, "must be in [0,1]");
            return v;
        };
        sc.failures.transfer_hang_probability = prob("transfer_hang_probability", 0.0);
        sc.failures.disk_full_probability = prob("disk_full_probability", 0.0);
        sc.failures.lost_contact_probability = prob("lost_contact_probability", 0.0);
        sc.failures.lost_contact_detection_delay_s =
            r.num(f, "lost_contact_detection_delay_s", "failures", 21600.0);
        r.check(sc.failures.lost_contact_detection_delay_s >= 0,
                "failures.lost_contact_detection_delay_s", "must be >= 0");
        if (f.contains("hang_attempt_probabilities") &&
            f.at("hang_attempt_probabilities").is_array()) {
            for (const auto& p : f.at("hang_attempt_probabilities")) {
                double v = p.is_number() ? p.get<double>() : -1.0;
                r.check(v >= 0.0 && v <= 1.0, "failures.hang_attempt_probabilities",
                        "entries must be in [0,1]");
                sc.failures.hang_attempt_probabilities.push_back(v);
            }
        }
    }

    // Outages
    if (root.contains("outages") && root.at("outages").is_array()) {
        int i = 0;
        for (const auto& body : root.at("outages")) {
            std::string path = "outages[" + std::to_string(i++) + "]";
            OutageWindow w;
            w.site = r.str(body, "site", path, "*", true);
            if (w.site != "*" && !sc.find_site(w.site)) r.fail(path + ".site", "unknown site " + w.site);
            w.start_day = r.num(body, "start_day", path, 0.0, true);
            w.end_day = r.num(body, "end_day", path, 0.0, true);
            r.check(w.end_day > w.start_day, path, "end_day must be after start_day");
            w.label = r.str(body, "label", path, "");
            sc.outages.push_back(std::move(w));
        }
    }

    // Masters
    if (root.contains("masters") && root.at("masters").is_array()) {
        int i = 0;
        for (const auto& body : root.at("masters")) {
            std::string path = "masters[" + std::to_string(i++) + "]";
            MasterConfig m;
            m.master_id = r.str(body, "id", path, "", true);
            m.max_tracked_processes =
                static_cast<int>(r.integer(body, "max_tracked_processes", path, 400));
            r.check(m.max_tracked_processes >= 1, path + ".max_tracked_processes", "must be >= 1");
            for (const auto& other : sc.masters)
                if (other.master_id == m.master_id) r.fail(path + ".id", "duplicate master id");
            sc.masters.push_back(std::move(m));
        }
    }
    if (sc.masters.empty()) sc.masters.push_back({"mop-master-1", 400});

    // Assignment
    if (root.contains("assignment")) {
        std::string policy = r.str(root.at("assignment"), "policy", "assignment",
                                   "capacity_weighted");
        if (policy == "capacity_weighted") {
            sc.assignment.policy = AssignmentPolicy::CapacityWeighted;
        } else if (policy == "round_robin") {
            sc.assignment.policy = AssignmentPolicy::RoundRobin;
        } else if (policy.rfind("single:", 0) == 0) {
            sc.assignment.policy = AssignmentPolicy::SingleSite;
            sc.assignment.single_site = policy.substr(7);
            if (!sc.find_site(sc.assignment.single_site))
                r.fail("assignment.policy", "unknown site " + sc.assignment.single_site);
        } else {
            r.fail("assignment.policy", "unknown policy " + policy);
        }
    }

    // Submission plan
    if (root.contains("submission") && root.at("submission").is_array()) {
        int i = 0;
        for (const auto& body : root.at("submission")) {
            std::string path = "submission[" + std::to_string(i++) + "]";
            SubmissionPlan plan;
            plan.request = r.str(body, "request", path, "", true);
            if (!plan.request.empty() && !sc.find_request(plan.request))
                r.fail(path + ".request", "unknown request " + plan.request);
            plan.start_day = r.num(body, "start_day", path, 0.0);
            r.check(plan.start_day >= 0, path + ".start_day", "must be >= 0");
            plan.jobs_per_day = r.num(body, "jobs_per_day", path, 0.0);
            r.check(plan.jobs_per_day >= 0, path + ".jobs_per_day", "must be >= 0");
            for (const auto& other : sc.submission)
                if (other.request == plan.request) r.fail(path, "duplicate submission plan");
            sc.submission.push_back(std::move(plan));
        }
    }

    // FTSH
    if (root.contains("ftsh")) {
        const json& f = root.at("ftsh");
        sc.ftsh.enabled = r.boolean(f, "enabled", "ftsh", true);
        sc.ftsh.spec.timeout_s = r.num(f, "timeout_s", "ftsh", 300.0);
        sc.ftsh.spec.max_attempts = static_cast<int>(r.integer(f, "max_attempts", "ftsh", 5));
        sc.ftsh.spec.backoff_s = r.num(f, "backoff_s", "ftsh", 60.0);
        sc.ftsh.spec.multiplicative_backoff =
            r.boolean(f, "multiplicative_backoff", "ftsh", false);
        r.check(sc.ftsh.spec.timeout_s > 0, "ftsh.timeout_s", "must be > 0");
        r.check(sc.ftsh.spec.max_attempts >= 1, "ftsh.max_attempts", "must be >= 1");
        r.check(sc.ftsh.spec.backoff_s >= 0, "ftsh.backoff_s", "must be >= 0");
    }

    // Retry policy
    if (root.contains("retry")) {
        const json& f = root.at("retry");
        sc.retry.max_attempts = static_cast<int>(r.integer(f, "max_attempts", "retry", 5));
        sc.retry.unbounded = r.boolean(f, "unbounded", "retry", false);
        sc.retry.loop_threshold = static_cast<int>(r.integer(f, "loop_threshold", "retry", 3));
        r.check(sc.retry.max_attempts >= 1, "retry.max_attempts", "must be >= 1");
        r.check(sc.retry.loop_threshold >= 1, "retry.loop_threshold", "must be >= 1");
    }

    // Stage-in
    if (root.contains("stage_in")) {
        const json& f = root.at("stage_in");
        std::string mode = r.str(f, "mode", "stage_in", "PreInstalled");
        if (mode == "PreInstalled")
            sc.stage_in.mode = StageInMode::PreInstalled;
        else if (mode == "PerJob")
            sc.stage_in.mode = StageInMode::PerJob;
        else
            r.fail("stage_in.mode", "must be PreInstalled or PerJob");
        sc.stage_in.helper_mb = r.num(f, "helper_mb", "stage_in", 5.0);
        sc.stage_in.app_distribution_mb = r.num(f, "app_distribution_mb", "stage_in", 500.0);
        r.check(sc.stage_in.helper_mb >= 0, "stage_in.helper_mb", "must be >= 0");
        r.check(sc.stage_in.app_distribution_mb >= 0, "stage_in.app_distribution_mb",
                "must be >= 0");
    }
    sc.cleanup_duration_s = r.num(root, "cleanup_duration_s", "scenario", 30.0);
    r.check(sc.cleanup_duration_s >= 0, "scenario.cleanup_duration_s", "must be >= 0");

    // VO
    if (root.contains("vo")) {
        const json& v = root.at("vo");
        sc.vo.sync_period_hours = r.num(v, "sync_period_hours", "vo", 6.0);
        r.check(sc.vo.sync_period_hours > 0, "vo.sync_period_hours", "must be > 0");
        if (v.contains("groups") && v.at("groups").is_array()) {
            int i = 0;
            for (const auto& body : v.at("groups")) {
                std::string path = "vo.groups[" + std::to_string(i++) + "]";
                VoGroupConfig g;
                g.name = r.str(body, "name", path, "", true);
                g.account = r.str(body, "account", path, "", true);
                sc.vo.groups.push_back(std::move(g));
            }
        }
        if (v.contains("users") && v.at("users").is_array()) {
            int i = 0;
            for (const auto& body : v.at("users")) {
                std::string path = "vo.users[" + std::to_string(i++) + "]";
                VoUserConfig u;
                u.dn = r.str(body, "dn", path, "", true);
                std::string ca = r.str(body, "ca", path, "DOESG");
                if (ca == "Globus")
                    u.ca = CertificateAuthority::Globus;
                else if (ca == "DOESG")
                    u.ca = CertificateAuthority::DOESG;
                else
                    r.fail(path + ".ca", "must be Globus or DOESG");
                if (body.contains("groups") && body.at("groups").is_array())
                    for (const auto& g : body.at("groups"))
                        if (g.is_string()) u.groups.push_back(g.get<std::string>());
                bool group_known = true;
                for (const auto& g : u.groups) {
                    bool found = false;
                    for (const auto& gg : sc.vo.groups)
                        if (gg.name == g) found = true;
                    if (!found) group_known = false;
                }
                r.check(group_known, path + ".groups", "references an unknown group");
                sc.vo.users.push_back(std::move(u));
            }
        }
        if (v.contains("request_dns") && v.at("request_dns").is_object()) {
            for (const auto& [req, dn] : v.at("request_dns").items()) {
                if (!sc.find_request(req))
                    r.fail("vo.request_dns." + req, "unknown request " + req);
                if (dn.is_string()) sc.vo.request_dns[req] = dn.get<std::string>();
            }
        }
    }
    // A campaign needs at least one authorized identity to dispatch under.
    if (sc.vo.groups.empty()) {
        sc.vo.groups.push_back({"uscms", "uscms01"});
        sc.vo.users.push_back({"/DC=org/DC=doegrids/OU=People/CN=Production Operator",
                               CertificateAuthority::DOESG,
                               {"uscms"}});
    }

    // Monitor
    if (root.contains("monitor")) {
        const json& m = root.at("monitor");
        sc.monitor.sample_period_hours = r.num(m, "sample_period_hours", "monitor", 1.0);
        r.check(sc.monitor.sample_period_hours > 0, "monitor.sample_period_hours", "must be > 0");
        sc.monitor.windows = static_cast<int>(r.integer(m, "windows", "monitor", 12));
        r.check(sc.monitor.windows >= 1, "monitor.windows", "must be >= 1");
        if (m.contains("ceiling_events_per_day")) {
            double c = r.num(m, "ceiling_events_per_day", "monitor", 0.0);
            r.check(c > 0, "monitor.ceiling_events_per_day", "must be > 0");
            sc.monitor.ceiling_events_per_day = c;
        }
        if (m.contains("tracked_request")) {
            std::string t = r.str(m, "tracked_request", "monitor", "");
            if (!sc.find_request(t)) r.fail("monitor.tracked_request", "unknown request " + t);
            sc.monitor.tracked_request = t;
        }
    }

    // Cross references that only make sense once everything is read.
    for (const auto& [req, dn] : sc.vo.request_dns) {
        bool present = false;
        for (const auto& u : sc.vo.users)
            if (u.dn == dn) present = true;
        r.check(present, "vo.request_dns." + req, "DN not in the user directory");
    }

    if (result.errors.empty()) result.scenario = std::move(sc);
    return result;
}

inline json scenario_to_json(const Scenario& sc) {
    json root;
    root["schema_version"] = sc.schema_version;
    root["name"] = sc.name;
    if (sc.seed) root["seed"] = *sc.seed;
    root["duration_days"] = sc.duration_days;
    json pipelines = json::object();
    for (const auto& [id, pc] : sc.pipelines) {
        json body;
        body["stages"] = pc.stages;
        if (pc.pileup_ratio != 0.0) body["pileup_ratio"] = pc.pileup_ratio;
        if (!pc.configure.empty()) body["configure"] = pc.configure;
        pipelines[id] = body;
    }
    root["pipelines"] = pipelines;
    root["requests"] = json::array();
    for (const auto& rc : sc.requests)
        root["requests"].push_back({{"id", rc.id},
                                    {"events", rc.events},
                                    {"pipeline", rc.pipeline},
                                    {"chunk_size", rc.chunk_size}});
    root["sites"] = json::array();
    for (const auto& s : sc.sites)
        root["sites"].push_back({{"name", s.name},
                                 {"worker_cpus", s.worker_cpus},
                                 {"cpu_speed_ghz", s.cpu_speed_ghz},
                                 {"os", s.os},
                                 {"disk_mb", s.disk_mb},
                                 {"available_from_day", s.available_from_day}});
    root["channels"]["defaults"] = {{"bandwidth_mb_s", sc.channel_defaults.bandwidth_mb_s},
                                    {"latency_s", sc.channel_defaults.latency_s}};
    for (const auto& [site, cd] : sc.channel_overrides)
        root["channels"]["overrides"][site] = {{"bandwidth_mb_s", cd.bandwidth_mb_s},
                                               {"latency_s", cd.latency_s}};
    root["failures"] = {
        {"transfer_hang_probability", sc.failures.transfer_hang_probability},
        {"disk_full_probability", sc.failures.disk_full_probability},
        {"lost_contact_probability", sc.failures.lost_contact_probability},
        {"lost_contact_detection_delay_s", sc.failures.lost_contact_detection_delay_s}};
    if (!sc.failures.hang_attempt_probabilities.empty())
        root["failures"]["hang_attempt_probabilities"] = sc.failures.hang_attempt_probabilities;
    root["outages"] = json::array();
    for (const auto& w : sc.outages)
        root["outages"].push_back({{"site", w.site},
                                   {"start_day", w.start_day},
                                   {"end_day", w.end_day},
                                   {"label", w.label}});
    root["masters"] = json::array();
    for (const auto& m : sc.masters)
        root["masters"].push_back(
            {{"id", m.master_id}, {"max_tracked_processes", m.max_tracked_processes}});
    switch (sc.assignment.policy) {
    case AssignmentPolicy::CapacityWeighted: root["assignment"]["policy"] = "capacity_weighted"; break;
    case AssignmentPolicy::RoundRobin: root["assignment"]["policy"] = "round_robin"; break;
    case AssignmentPolicy::SingleSite:
        root["assignment"]["policy"] = "single:" + sc.assignment.single_site;
        break;
    }
    root["submission"] = json::array();
    for (const auto& p : sc.submission)
        root["submission"].push_back({{"request", p.request},
                                      {"start_day", p.start_day},
                                      {"jobs_per_day", p.jobs_per_day}});
    root["ftsh"] = {{"enabled", sc.ftsh.enabled},
                    {"timeout_s", sc.ftsh.spec.timeout_s},
                    {"max_attempts", sc.ftsh.spec.max_attempts},
                    {"backoff_s", sc.ftsh.spec.backoff_s},
                    {"multiplicative_backoff", sc.ftsh.spec.multiplicative_backoff}};
    root["retry"] = {{"max_attempts", sc.retry.max_attempts},
                     {"unbounded", sc.retry.unbounded},
                     {"loop_threshold", sc.retry.loop_threshold}};
    root["stage_in"] = {
        {"mode", sc.stage_in.mode == StageInMode::PreInstalled ? "PreInstalled" : "PerJob"},
        {"helper_mb", sc.stage_in.helper_mb},
        {"app_distribution_mb", sc.stage_in.app_distribution_mb}};
    root["cleanup_duration_s"] = sc.cleanup_duration_s;
    json vo;
    vo["sync_period_hours"] = sc.vo.sync_period_hours;
    vo["groups"] = json::array();
    for (const auto& g : sc.vo.groups)
        vo["groups"].push_back({{"name", g.name}, {"account", g.account}});
    vo["users"] = json::array();
    for (const auto& u : sc.vo.users)
        vo["users"].push_back(
            {{"dn", u.dn}, {"ca", to_string(u.ca)}, {"groups", u.groups}});
    if (!sc.vo.request_dns.empty()) vo["request_dns"] = sc.vo.request_dns;
    root["vo"] = vo;
    json mon;
    mon["sample_period_hours"] = sc.monitor.sample_period_hours;
    mon["windows"] = sc.monitor.windows;
    if (sc.monitor.ceiling_events_per_day)
        mon["ceiling_events_per_day"] = *sc.monitor.ceiling_events_per_day;
    if (sc.monitor.tracked_request) mon["tracked_request"] = *sc.monitor.tracked_request;
    root["monitor"] = mon;
    return root;
}

} // namespace igt
