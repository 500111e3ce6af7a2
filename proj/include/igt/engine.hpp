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
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "igt/dag.hpp"
#include "igt/executor.hpp"
#include "igt/ftsh.hpp"
#include "igt/log.hpp"
#include "igt/monitor.hpp"
#include "igt/rng.hpp"
#include "igt/scenario.hpp"
#include "igt/sim/channel.hpp"
#include "igt/sim/event_queue.hpp"
#include "igt/vo.hpp"
#include "igt/workload.hpp"

namespace igt {

struct EngineOptions {
    std::ostream* event_log = nullptr; // text event log sink, may be null
    bool keep_records = false;         // retain structured records in memory
    std::optional<std::uint64_t> seed_override;
};

struct RequestStats {
    std::string id;
    long long events_requested = 0;
    long long events_completed = 0;
    int jobs = 0;
    int jobs_completed = 0;
    int jobs_abandoned = 0;
    int jobs_truncated = 0; // non-terminal when the horizon cut the run
    double useful_ghz_seconds = 0.0;
};

struct MasterStats {
    std::string id;
    int max_concurrent_tracked = 0;
    long long saturation_incidents = 0;
    long long dispatches = 0;
    int jobs_assigned = 0;
};

struct ReplicaEntry {
    std::string job_id;
    int file_count = 0;
    double total_mb = 0.0;
};

struct CampaignResult {
    double horizon_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<RequestStats> requests;
    std::vector<MasterStats> masters;
    double wasted_cpu_seconds = 0.0;
    double wasted_superseded_s = 0.0;
    double wasted_killed_s = 0.0;
    double wasted_failed_s = 0.0;
    long long auth_denials = 0;
    long long retry_loops_flagged = 0;
    int grid_max_concurrent_tracked = 0;
    std::vector<CompletionRecord> completions;       // every stage-out, time order
    std::vector<MetricSample> samples;               // sampling cadence, per site
    std::vector<ReplicaEntry> replicas;
    std::vector<std::string> site_names;

    long long total_events_completed() const {
        long long total = 0;
        for (const auto& r : requests) total += r.events_completed;
        return total;
    }

    const RequestStats* find_request(const std::string& id) const {
        for (const auto& r : requests)
            if (r.id == id) return &r;
        return nullptr;
    }
};

/// Deterministic replay of one production campaign: submission, DAG-wrapped
/// jobs dispatched by tracked-process-limited masters onto batch sites
/// through shared transfer channels, with fault injection, monitoring, and
/// end-of-run replica registration. Single-threaded; all randomness comes
/// from named streams derived from the scenario seed.
class CampaignEngine {
public:
    explicit CampaignEngine(Scenario scenario, EngineOptions options = {})
        : sc_(std::move(scenario)), opt_(options) {
        seed_ = opt_.seed_override ? *opt_.seed_override : sc_.seed.value_or(0);
        build();
    }

    const Scenario& scenario() const { return sc_; }
    const std::vector<LogRecord>& records() const { return records_; }
    double now() const { return queue_.now(); }

    CampaignResult run() {
        running_ = true;
        write_header();
        while (!horizon_reached_) {
            auto ev = queue_.advance();
            if (!ev) break;
            handle(*ev);
        }
        running_ = false;
        finalize();
        return std::move(result_);
    }

    /// Registers one replica-catalog entry per job whose results made it back
    /// to the master site. Data products are catalogued only at the end of
    /// processing; calling this mid-campaign is a contract violation.
    std::vector<ReplicaEntry> register_replicas() const {
        if (running_) throw std::logic_error("replica registration is an end-of-campaign step");
        std::vector<ReplicaEntry> entries;
        for (const auto& job : jobs_) {
            if (!job.stageout_completed) continue;
            entries.push_back(
                {job.job_id, static_cast<int>(pipeline_of(job).stages.size()), job.stageout_mb});
        }
        return entries;
    }

    struct SubmitCheck {
        bool accepted = true;
        std::string reason;
    };

    /// Admission contract of the submit path: the DAG must be structurally
    /// valid, the target site known, the master known, and the job id fresh.
    /// Capacity never rejects a submission; it only defers dispatch.
    SubmitCheck check_submission(const Dag& dag, const std::string& site_name,
                                 const std::string& master_id) const {
        auto v = validate_dag(dag);
        if (!v.ok) return {false, "invalid dag: " + v.violation};
        bool site_known = false;
        for (const auto& s : sites_)
            if (s.cfg.name == site_name) site_known = true;
        if (!site_known) return {false, "unknown site: " + site_name};
        bool master_known = false;
        for (const auto& m : masters_)
            if (m.cfg.master_id == master_id) master_known = true;
        if (!master_known) return {false, "unknown master: " + master_id};
        for (const auto& job : jobs_)
            if (job.job_id == dag.job_id && job.submitted)
                return {false, "duplicate job id: " + dag.job_id};
        return {};
    }

    /// Local monitoring snapshot for one site; unknown sites are an error.
    MetricSample collect(const std::string& site_name) const {
        for (const auto& site : sites_) {
            if (site.cfg.name == site_name) {
                MetricSample s;
                s.site = site.cfg.name;
                s.time_s = queue_.now();
                s.cpus_busy = site.busy;
                s.queue_length = static_cast<int>(site.batch_queue.size());
                s.events_completed_cumulative = site.events_completed;
                s.wasted_cpu_seconds_cumulative = site.wasted_cpu_s;
                s.fresh = site.up;
                return s;
            }
        }
        throw std::invalid_argument("unknown site: " + site_name);
    }

private:
    // ----- runtime entities ------------------------------------------------

    struct SiteRuntime {
        SiteConfig cfg;
        std::vector<std::pair<double, double>> outages; // merged, seconds
        bool up = false;
        int busy = 0;
        int max_busy_seen = 0;
        std::deque<std::uint64_t> batch_queue; // queued run execs
        double disk_used_mb = 0.0;
        long long events_completed = 0;
        double wasted_cpu_s = 0.0;
    };

    struct NodeRef {
        int job = -1;
        int node = -1;
    };

    // Dispatch order is fewest-nodes-to-completion first (cleanups, then
    // stage-outs, then the deepest runs, with fresh stage-ins last); FIFO by
    // ready time within a class. Started work drains before new work is
    // admitted, so a deep submission backlog cannot starve results, pile up
    // worker disks, or swamp the transfer channels.
    static constexpr int kDispatchClasses = 8; // longest chain: 5 runs + 3

    int dispatch_class(const JobRuntime& job, int node) const {
        int remaining = static_cast<int>(job.nodes.size()) - 1 - node;
        if (remaining < 0) remaining = 0;
        if (remaining >= kDispatchClasses) remaining = kDispatchClasses - 1;
        return remaining;
    }

    struct MasterRuntime {
        MasterConfig cfg;
        int tracked = 0;
        int max_tracked_seen = 0;
        long long saturation_incidents = 0;
        bool saturated = false;
        bool scan_scheduled = false;
        long long dispatches = 0;
        int jobs_assigned = 0;
        std::array<std::deque<NodeRef>, kDispatchClasses> ready;
        std::map<int, std::deque<NodeRef>> blocked_on_site;
        std::deque<NodeRef> blocked_on_auth;

        std::size_t ready_count() const {
            std::size_t n = 0;
            for (const auto& q : ready) n += q.size();
            return n;
        }
    };

    struct NodeRuntime {
        NodeRunState rs;
        std::uint64_t live_exec = kNoExec;
        bool loop_logged = false;
    };

    struct JobRuntime {
        int request = -1;
        std::string job_id;
        long long events = 0;
        double submit_time = 0.0;
        int site = -1;
        int master = -1;
        int dn_index = -1;
        double stagein_mb = 0.0;
        double stageout_mb = 0.0;
        double disk_footprint_mb = 0.0;
        std::vector<NodeRuntime> nodes;
        bool submitted = false;
        bool abandoned = false;
        bool stageout_completed = false;
        bool all_done = false;
        double useful_ghz_s = 0.0;
    };

    struct RunExec {
        int job = -1;
        int node = -1;
        int site = -1;
        double start = 0.0;
        double duration = 0.0;
        bool is_cleanup = false;
        bool running = false;
        bool superseded = false; // master resubmitted; completion is waste
        bool finished = false;
        std::uint64_t gen = 0;
    };

    struct TransferExec {
        int job = -1;
        int node = -1;
        int channel = -1;
        int attempt = 0;
        double attempt_start = 0.0;
        bool hung = false;
        bool active = false; // currently drawing bandwidth
        bool finished = false;
        std::uint64_t gen = 0;
    };

    static constexpr std::uint64_t kNoExec = ~0ull;

    enum EventKind : int {
        kEvSubmitJob,         // a = job index
        kEvDispatchScan,      // a = master index
        kEvChannelCompletion, // a = channel, b = channel generation
        kEvFtshTimeout,       // a = transfer exec, b = exec generation
        kEvFtshRetry,         // a = transfer exec, b = exec generation
        kEvRunComplete,       // a = run exec, b = exec generation
        kEvLostDetect,        // a = run exec, b = exec generation
        kEvSiteChange,        // a = site index
        kEvMonitorSample,
        kEvGridmapSync,
        kEvHorizon,
    };

    // ----- construction ----------------------------------------------------

    void build() {
        horizon_s_ = sc_.duration_days * kSecondsPerDay;
        hang_rng_ = RngStream(seed_, "transfer-hang");
        disk_rng_ = RngStream(seed_, "disk-full");
        lost_rng_ = RngStream(seed_, "lost-contact");
        lost_time_rng_ = RngStream(seed_, "lost-contact-time");

        for (const auto& cfg : sc_.sites) {
            SiteRuntime site;
            site.cfg = cfg;
            for (const auto& w : sc_.outages) {
                if (w.site == "*" || w.site == cfg.name)
                    site.outages.emplace_back(w.start_day * kSecondsPerDay,
                                              w.end_day * kSecondsPerDay);
            }
            merge_windows(site.outages);
            site.up = site_should_be_up(site, 0.0);
            sites_.push_back(std::move(site));
        }

        for (const auto& m : sc_.masters) {
            MasterRuntime master;
            master.cfg = m;
            masters_.push_back(std::move(master));
        }

        for (std::size_t m = 0; m < masters_.size(); ++m) {
            for (const auto& site : sites_) {
                ChannelSpec spec;
                spec.master = masters_[m].cfg.master_id;
                spec.site = site.cfg.name;
                ChannelDefaults cd = sc_.channel_defaults;
                if (auto it = sc_.channel_overrides.find(site.cfg.name);
                    it != sc_.channel_overrides.end())
                    cd = it->second;
                spec.bandwidth_mb_s = cd.bandwidth_mb_s;
                spec.latency_s = cd.latency_s;
                spec.hang_attempt_probabilities = sc_.failures.hang_schedule();
                channels_.emplace_back(spec);
            }
        }

        directory_ = UserDirectory();
        for (const auto& g : sc_.vo.groups) directory_.create_group(g.name, g.account);
        for (const auto& u : sc_.vo.users) {
            GridUser user{u.dn, u.ca, {}};
            for (const auto& g : u.groups) directory_.add_user(user, g);
        }
        gridmap_ = GridmapSnapshot::from_directory(directory_);
        for (const auto& u : sc_.vo.users) dns_.push_back(u.dn);

        // Requests -> jobs, with per-job submission times from the plan.
        for (const auto& rc : sc_.requests) {
            RequestRuntime rr;
            rr.cfg = rc;
            rr.pipeline = sc_.build_pipeline(rc.pipeline);
            requests_.push_back(std::move(rr));
        }
        for (std::size_t r = 0; r < requests_.size(); ++r) {
            const RequestConfig& rc = requests_[r].cfg;
            ProductionRequest req{rc.id, rc.events, requests_[r].pipeline, rc.chunk_size};
            auto specs = chunk_request(req);
            const SubmissionPlan* plan = nullptr;
            for (const auto& p : sc_.submission)
                if (p.request == rc.id) plan = &p;
            // One structural validation per request; every job is wrapped the
            // same way.
            if (!specs.empty()) {
                Dag probe = wrap_job(specs.front(), sc_.stage_in.mode, sizing());
                auto v = validate_dag(probe);
                if (!v.ok) throw std::logic_error("wrapped job failed validation: " + v.violation);
            }
            for (std::size_t i = 0; i < specs.size(); ++i) {
                JobRuntime job;
                job.request = static_cast<int>(r);
                job.job_id = specs[i].job_id;
                job.events = specs[i].event_count();
                double start = plan ? plan->start_day * kSecondsPerDay : 0.0;
                double rate = plan ? plan->jobs_per_day : 0.0;
                job.submit_time =
                    rate > 0 ? start + static_cast<double>(i) * kSecondsPerDay / rate : start;
                job.stagein_mb = sc_.stage_in.helper_mb +
                                 (sc_.stage_in.mode == StageInMode::PerJob
                                      ? sc_.stage_in.app_distribution_mb
                                      : 0.0);
                job.stageout_mb = estimate_job_output_mb(specs[i]);
                job.nodes.resize(requests_[r].pipeline.stages.size() + 3);
                if (auto it = sc_.vo.request_dns.find(rc.id); it != sc_.vo.request_dns.end()) {
                    for (std::size_t d = 0; d < dns_.size(); ++d)
                        if (dns_[d] == it->second) job.dn_index = static_cast<int>(d);
                } else {
                    job.dn_index = dns_.empty() ? -1 : 0;
                }
                requests_[r].job_indices.push_back(static_cast<int>(jobs_.size()));
                jobs_.push_back(std::move(job));
            }
        }

        // Event backbone. Jobs the plan would submit after the horizon never
        // enter the system; they show up as truncated work in the summary.
        for (std::size_t j = 0; j < jobs_.size(); ++j)
            if (jobs_[j].submit_time < horizon_s_)
                queue_.schedule(jobs_[j].submit_time, kEvSubmitJob, j);
        for (std::size_t s = 0; s < sites_.size(); ++s)
            for (double boundary : site_boundaries(sites_[s]))
                if (boundary > 0 && boundary <= horizon_s_)
                    queue_.schedule(boundary, kEvSiteChange, s);
        double sample_period = sc_.monitor.sample_period_hours * 3600.0;
        for (double t = sample_period; t <= horizon_s_ + 1e-9; t += sample_period)
            queue_.schedule(t, kEvMonitorSample);
        double sync_period = sc_.vo.sync_period_hours * 3600.0;
        for (double t = sync_period; t <= horizon_s_ + 1e-9; t += sync_period)
            queue_.schedule(t, kEvGridmapSync);
        queue_.schedule(horizon_s_, kEvHorizon);
    }

    StageInSizing sizing() const {
        return {sc_.stage_in.helper_mb, sc_.stage_in.app_distribution_mb};
    }

    static void merge_windows(std::vector<std::pair<double, double>>& windows) {
        std::sort(windows.begin(), windows.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& w : windows) {
            if (!merged.empty() && w.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, w.second);
            else
                merged.push_back(w);
        }
        windows = std::move(merged);
    }

    bool site_should_be_up(const SiteRuntime& site, double t) const {
        if (t < site.cfg.available_from_day * kSecondsPerDay) return false;
        for (const auto& [a, b] : site.outages)
            if (t >= a && t < b) return false;
        return true;
    }

    std::vector<double> site_boundaries(const SiteRuntime& site) const {
        std::vector<double> out;
        out.push_back(site.cfg.available_from_day * kSecondsPerDay);
        for (const auto& [a, b] : site.outages) {
            out.push_back(a);
            out.push_back(b);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    const PipelineSpec& pipeline_of(const JobRuntime& job) const {
        return requests_[job.request].pipeline;
    }

    // Node index layout along the chain: 0 StageIn, 1..k Run, k+1 StageOut,
    // k+2 Cleanup.
    NodeKind node_kind(const JobRuntime& job, int node) const {
        int k = static_cast<int>(pipeline_of(job).stages.size());
        if (node == 0) return NodeKind::StageIn;
        if (node <= k) return NodeKind::Run;
        if (node == k + 1) return NodeKind::StageOut;
        return NodeKind::Cleanup;
    }

    std::string node_name(const JobRuntime& job, int node) const {
        switch (node_kind(job, node)) {
        case NodeKind::StageIn: return "stagein";
        case NodeKind::Run:
            return "run" + std::to_string(node) + "-" +
                   pipeline_of(job).stages[node - 1].name;
        case NodeKind::StageOut: return "stageout";
        case NodeKind::Cleanup: return "cleanup";
        }
        return "?";
    }

    int channel_index(int master, int site) const {
        return master * static_cast<int>(sites_.size()) + site;
    }

    // ----- logging ----------------------------------------------------------

    void write_line(const std::string& line) {
        if (opt_.event_log) {
            *opt_.event_log << line << '\n';
        }
    }

    void write_header() {
        std::string line = "# igtsim-events v1";
        logfmt::append_str(line, "scenario", sc_.name);
        logfmt::append_int(line, "seed", static_cast<long long>(seed_));
        write_line(line);
    }

    void keep(LogRecord rec) {
        if (opt_.keep_records) records_.push_back(std::move(rec));
    }

    void log_node_transition(const NodeRef& ref, NodeState from, NodeState to,
                             const std::string& cause, const std::string& account = "") {
        const JobRuntime& job = jobs_[ref.job];
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, queue_.now());
            logfmt::append_str(line, "ev", "NODE");
            logfmt::append_str(line, "job", job.job_id);
            logfmt::append_str(line, "node", node_name(job, ref.node));
            logfmt::append_str(line, "master", masters_[job.master].cfg.master_id);
            logfmt::append_str(line, "site", sites_[job.site].cfg.name);
            logfmt::append_str(line, "from", to_string(from));
            logfmt::append_str(line, "to", to_string(to));
            logfmt::append_int(line, "attempt", job.nodes[ref.node].rs.attempts);
            logfmt::append_str(line, "cause", cause.empty() ? "-" : cause);
            if (!account.empty()) {
                logfmt::append_quoted(line, "dn", dns_[job.dn_index]);
                logfmt::append_str(line, "account", account);
            }
            write_line(line);
        }
        LogRecord rec;
        rec.type = LogRecord::Type::Node;
        rec.t = queue_.now();
        rec.master = job.master;
        rec.job = ref.job;
        rec.node = ref.node;
        rec.site = job.site;
        rec.from = from;
        rec.to = to;
        rec.attempt = job.nodes[ref.node].rs.attempts;
        rec.cause = cause;
        if (!account.empty()) {
            rec.dn = dns_[job.dn_index];
            rec.account = account;
        }
        keep(std::move(rec));
    }

    void log_simple(LogRecord::Type type, const std::string& ev, const NodeRef& ref,
                    const std::string& cause, double value) {
        const JobRuntime& job = jobs_[ref.job];
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, queue_.now());
            logfmt::append_str(line, "ev", ev);
            logfmt::append_str(line, "job", job.job_id);
            logfmt::append_str(line, "node", node_name(job, ref.node));
            if (!cause.empty()) logfmt::append_str(line, "cause", cause);
            if (value != 0.0) logfmt::append_num(line, "value", value);
            write_line(line);
        }
        LogRecord rec;
        rec.type = type;
        rec.t = queue_.now();
        rec.master = job.master;
        rec.job = ref.job;
        rec.node = ref.node;
        rec.site = job.site;
        rec.cause = cause;
        rec.value = value;
        keep(std::move(rec));
    }

    // ----- submission and dispatch ------------------------------------------

    void on_submit(int job_index) {
        JobRuntime& job = jobs_[job_index];
        job.submitted = true;
        job.site = assign_site();
        job.master = next_master_++ % static_cast<int>(masters_.size());
        masters_[job.master].jobs_assigned++;
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, queue_.now());
            logfmt::append_str(line, "ev", "SUBMIT");
            logfmt::append_str(line, "job", job.job_id);
            logfmt::append_str(line, "request", requests_[job.request].cfg.id);
            logfmt::append_str(line, "master", masters_[job.master].cfg.master_id);
            logfmt::append_str(line, "site", sites_[job.site].cfg.name);
            logfmt::append_quoted(line, "dn", job.dn_index >= 0 ? dns_[job.dn_index] : "");
            write_line(line);
        }
        LogRecord rec;
        rec.type = LogRecord::Type::Submit;
        rec.t = queue_.now();
        rec.master = job.master;
        rec.job = job_index;
        rec.site = job.site;
        keep(std::move(rec));

        NodeRef root{job_index, 0};
        set_ready(root);
    }

    /// Operator site choice at submission time over sites that have joined.
    int assign_site() {
        double now = queue_.now();
        std::vector<int> eligible;
        for (std::size_t s = 0; s < sites_.size(); ++s)
            if (sites_[s].cfg.worker_cpus > 0 &&
                now >= sites_[s].cfg.available_from_day * kSecondsPerDay - 1e-9)
                eligible.push_back(static_cast<int>(s));
        if (eligible.empty()) {
            // Nothing has joined yet; fall back to the full roster.
            for (std::size_t s = 0; s < sites_.size(); ++s)
                if (sites_[s].cfg.worker_cpus > 0) eligible.push_back(static_cast<int>(s));
        }
        if (eligible.empty()) throw std::logic_error("no site with worker CPUs");

        switch (sc_.assignment.policy) {
        case AssignmentPolicy::SingleSite:
            for (int s : eligible)
                if (sites_[s].cfg.name == sc_.assignment.single_site) return s;
            return eligible.front();
        case AssignmentPolicy::RoundRobin: {
            int pick = eligible[next_site_rr_ % eligible.size()];
            next_site_rr_++;
            return pick;
        }
        case AssignmentPolicy::CapacityWeighted:
        default: {
            // Highest-averages apportionment keeps the stream proportional to
            // capacity at any prefix. Counts restart whenever the eligible
            // roster changes: a newly joined site gets its fair share of new
            // submissions, not a catch-up flood of the whole backlog.
            if (assigned_counts_.size() != sites_.size()) assigned_counts_.assign(sites_.size(), 0);
            if (eligible != last_eligible_) {
                assigned_counts_.assign(sites_.size(), 0);
                last_eligible_ = eligible;
            }
            int best = eligible.front();
            double best_score = -1.0;
            for (int s : eligible) {
                double weight =
                    sites_[s].cfg.worker_cpus * sites_[s].cfg.cpu_speed_ghz;
                double score = weight / (assigned_counts_[s] + 1.0);
                if (score > best_score + 1e-12) {
                    best_score = score;
                    best = s;
                }
            }
            assigned_counts_[best]++;
            return best;
        }
        }
    }

    void set_ready(const NodeRef& ref) {
        JobRuntime& job = jobs_[ref.job];
        NodeRuntime& node = job.nodes[ref.node];
        NodeState from = node.rs.state;
        node.rs.state = NodeState::Ready;
        log_node_transition(ref, from, NodeState::Ready, from == NodeState::Failed ? "RETRY" : "");
        masters_[job.master].ready[dispatch_class(job, ref.node)].push_back(ref);
        schedule_scan(job.master);
    }

    void requeue_front(MasterRuntime& m, std::deque<NodeRef>& parked) {
        // Parked nodes are the oldest work in their class; back to the front.
        for (auto r = parked.rbegin(); r != parked.rend(); ++r)
            m.ready[dispatch_class(jobs_[r->job], r->node)].push_front(*r);
        parked.clear();
    }

    void schedule_scan(int master) {
        MasterRuntime& m = masters_[master];
        if (!m.scan_scheduled) {
            m.scan_scheduled = true;
            queue_.schedule(queue_.now(), kEvDispatchScan, master);
        }
    }

    void on_dispatch_scan(int master_index) {
        MasterRuntime& m = masters_[master_index];
        m.scan_scheduled = false;
        int deferred_by_capacity = 0;
        for (auto& queue : m.ready) {
            while (!queue.empty() && m.tracked < m.cfg.max_tracked_processes) {
                NodeRef ref = queue.front();
                queue.pop_front();
                JobRuntime& job = jobs_[ref.job];
                SiteRuntime& site = sites_[job.site];
                if (!site.up) {
                    m.blocked_on_site[job.site].push_back(ref);
                    continue;
                }
                auto account = gridmap_.authorize(dns_[job.dn_index]);
                if (!account) {
                    result_.auth_denials++;
                    log_simple(LogRecord::Type::AuthDenied, "AUTH_DENY", ref,
                               std::string(cause::kAuthDenied), 0.0);
                    if (opt_.keep_records) records_.back().dn = dns_[job.dn_index];
                    m.blocked_on_auth.push_back(ref);
                    continue;
                }
                dispatch(ref, *account);
            }
        }
        if (m.tracked >= m.cfg.max_tracked_processes)
            deferred_by_capacity = static_cast<int>(m.ready_count());

        if (deferred_by_capacity > 0) {
            if (!m.saturated) {
                m.saturated = true;
                m.saturation_incidents++;
                if (opt_.event_log) {
                    std::string line;
                    logfmt::append_time(line, queue_.now());
                    logfmt::append_str(line, "ev", "SATURATION");
                    logfmt::append_str(line, "master", m.cfg.master_id);
                    logfmt::append_int(line, "tracked", m.tracked);
                    logfmt::append_int(line, "deferred", deferred_by_capacity);
                    write_line(line);
                }
                LogRecord rec;
                rec.type = LogRecord::Type::Saturation;
                rec.t = queue_.now();
                rec.master = master_index;
                rec.value = deferred_by_capacity;
                keep(std::move(rec));
            }
        } else {
            m.saturated = false;
        }
    }

    void dispatch(const NodeRef& ref, const std::string& account) {
        JobRuntime& job = jobs_[ref.job];
        NodeRuntime& node = job.nodes[ref.node];
        MasterRuntime& m = masters_[job.master];

        node.rs.attempts++;
        node.rs.state = NodeState::Dispatched;
        m.tracked++;
        m.dispatches++;
        m.max_tracked_seen = std::max(m.max_tracked_seen, m.tracked);
        grid_tracked_++;
        result_.grid_max_concurrent_tracked =
            std::max(result_.grid_max_concurrent_tracked, grid_tracked_);
        log_node_transition(ref, NodeState::Ready, NodeState::Dispatched, "", account);

        switch (node_kind(job, ref.node)) {
        case NodeKind::StageIn: start_transfer(ref, job.stagein_mb); break;
        case NodeKind::StageOut: start_transfer(ref, job.stageout_mb); break;
        case NodeKind::Run: start_run(ref, false); break;
        case NodeKind::Cleanup: start_run(ref, true); break;
        }
    }

    void release_slot(const JobRuntime& job) {
        masters_[job.master].tracked--;
        grid_tracked_--;
        schedule_scan(job.master);
    }

    // ----- batch execution ---------------------------------------------------

    void start_run(const NodeRef& ref, bool is_cleanup) {
        JobRuntime& job = jobs_[ref.job];
        RunExec exec;
        exec.job = ref.job;
        exec.node = ref.node;
        exec.site = job.site;
        exec.is_cleanup = is_cleanup;
        if (is_cleanup) {
            exec.duration = sc_.cleanup_duration_s;
        } else {
            const StageProfile& stage = pipeline_of(job).stages[ref.node - 1];
            exec.duration = stage_cost_s(stage, job.events, sites_[job.site].cfg.cpu_speed_ghz);
        }
        std::uint64_t id = run_execs_.size();
        run_execs_.push_back(exec);
        job.nodes[ref.node].live_exec = id;

        SiteRuntime& site = sites_[job.site];
        if (is_cleanup) {
            begin_run(id); // head-node action, no worker CPU
        } else if (site.busy < site.cfg.worker_cpus) {
            begin_run(id);
        } else {
            site.batch_queue.push_back(id); // FIFO admission
        }
    }

    void begin_run(std::uint64_t exec_id) {
        RunExec& exec = run_execs_[exec_id];
        JobRuntime& job = jobs_[exec.job];
        SiteRuntime& site = sites_[exec.site];
        exec.running = true;
        exec.start = queue_.now();
        exec.gen++;
        if (!exec.is_cleanup) {
            site.busy++;
            site.max_busy_seen = std::max(site.max_busy_seen, site.busy);
            if (site.busy > site.cfg.worker_cpus)
                throw std::logic_error("CPU conservation violated at " + site.cfg.name);
        }
        NodeRef ref{exec.job, exec.node};
        job.nodes[exec.node].rs.state = NodeState::Running;
        log_node_transition(ref, NodeState::Dispatched, NodeState::Running, "");
        queue_.schedule(queue_.now() + exec.duration, kEvRunComplete, exec_id, exec.gen);

        // Contact with a running process may silently drop; the master only
        // notices after the detection delay and resubmits while the original
        // keeps running.
        if (!exec.is_cleanup && lost_rng_.bernoulli(sc_.failures.lost_contact_probability)) {
            double t_lost = queue_.now() + lost_time_rng_.uniform01() * exec.duration;
            queue_.schedule(t_lost + sc_.failures.lost_contact_detection_delay_s, kEvLostDetect,
                            exec_id, exec.gen);
        }
    }

    void admit_from_queue(int site_index) {
        SiteRuntime& site = sites_[site_index];
        while (site.up && site.busy < site.cfg.worker_cpus && !site.batch_queue.empty()) {
            std::uint64_t next = site.batch_queue.front();
            site.batch_queue.pop_front();
            begin_run(next);
        }
    }

    void on_run_complete(std::uint64_t exec_id, std::uint64_t gen) {
        RunExec& exec = run_execs_[exec_id];
        if (gen != exec.gen || exec.finished) return;
        exec.finished = true;
        exec.running = false;
        exec.gen++;
        JobRuntime& job = jobs_[exec.job];
        SiteRuntime& site = sites_[exec.site];
        if (!exec.is_cleanup) {
            site.busy--;
            admit_from_queue(exec.site);
        }

        NodeRef ref{exec.job, exec.node};
        if (exec.superseded) {
            // The zombie of a lost-contact restart came back; its output is
            // discarded and its CPU time is pure waste.
            add_waste(exec.site, exec.duration, WasteKind::Superseded);
            log_simple(LogRecord::Type::Duplicate, "DUPLICATE", ref,
                       std::string(cause::kLostContact), exec.duration);
            return;
        }

        job.nodes[exec.node].live_exec = kNoExec;

        if (exec.is_cleanup) {
            node_completed(ref);
            return;
        }

        // Output lands on the site scratch disk as the run finishes; a full
        // partition (or the injected chance of one) fails the node after the
        // cycles were already burned.
        const StageProfile& stage = pipeline_of(job).stages[exec.node - 1];
        double out_mb = stage.output_per_event_mb * static_cast<double>(job.events);
        bool full = site.disk_used_mb + out_mb > site.cfg.disk_mb + 1e-9;
        if (full || disk_rng_.bernoulli(sc_.failures.disk_full_probability)) {
            add_waste(exec.site, exec.duration, WasteKind::FailedRun);
            node_failed(ref, std::string(cause::kDiskFull));
            return;
        }
        site.disk_used_mb += out_mb;
        job.disk_footprint_mb += out_mb;
        job.useful_ghz_s += exec.duration * site.cfg.cpu_speed_ghz;
        requests_[job.request].stats_useful_ghz_s += exec.duration * site.cfg.cpu_speed_ghz;
        node_completed(ref);
    }

    void on_lost_detect(std::uint64_t exec_id, std::uint64_t gen) {
        RunExec& exec = run_execs_[exec_id];
        if (gen != exec.gen || exec.finished) return; // completed before the master noticed
        JobRuntime& job = jobs_[exec.job];
        if (job.nodes[exec.node].live_exec != exec_id) return;
        // The remote process is still alive; keep its completion event armed
        // but stop tracking it.
        exec.superseded = true;
        job.nodes[exec.node].live_exec = kNoExec;
        node_lost(NodeRef{exec.job, exec.node}, std::string(cause::kLostContact));
    }

    // ----- transfers ----------------------------------------------------------

    RetrySpec effective_ftsh() const {
        if (sc_.ftsh.enabled) return sc_.ftsh.spec;
        RetrySpec raw;
        raw.timeout_s = std::numeric_limits<double>::infinity();
        raw.max_attempts = 1;
        raw.backoff_s = 0.0;
        return raw;
    }

    void start_transfer(const NodeRef& ref, double size_mb) {
        JobRuntime& job = jobs_[ref.job];
        TransferExec exec;
        exec.job = ref.job;
        exec.node = ref.node;
        exec.channel = channel_index(job.master, job.site);
        std::uint64_t id = transfer_execs_.size();
        transfer_execs_.push_back(exec);
        job.nodes[ref.node].live_exec = id;
        job.nodes[ref.node].rs.state = NodeState::Running;
        log_node_transition(ref, NodeState::Dispatched, NodeState::Running, "");
        transfer_sizes_.push_back(size_mb);
        begin_attempt(id);
    }

    void begin_attempt(std::uint64_t exec_id) {
        TransferExec& exec = transfer_execs_[exec_id];
        SharedChannel& channel = channels_[exec.channel];
        exec.attempt++;
        exec.attempt_start = queue_.now();
        exec.gen++;
        double p = channel.spec().hang_probability_for_attempt(exec.attempt);
        exec.hung = hang_rng_.bernoulli(p);
        if (!exec.hung) {
            channel.add(exec_id, transfer_sizes_[exec_id], queue_.now());
            exec.active = true;
            reschedule_channel(exec.channel);
        }
        RetrySpec spec = effective_ftsh();
        if (std::isfinite(spec.timeout_s))
            queue_.schedule(queue_.now() + spec.timeout_s, kEvFtshTimeout, exec_id, exec.gen);
    }

    void reschedule_channel(int channel_index_) {
        SharedChannel& channel = channels_[channel_index_];
        if (auto t = channel.next_completion_time(queue_.now()))
            queue_.schedule(*t, kEvChannelCompletion, channel_index_, channel.generation());
    }

    void on_channel_completion(int channel_idx, std::uint64_t gen) {
        SharedChannel& channel = channels_[channel_idx];
        if (gen != channel.generation()) return; // membership changed since
        auto done = channel.collect_completed(queue_.now());
        for (std::uint64_t id : done) transfer_attempt_succeeded(id);
        reschedule_channel(channel_idx);
    }

    void transfer_attempt_succeeded(std::uint64_t exec_id) {
        TransferExec& exec = transfer_execs_[exec_id];
        exec.active = false;
        exec.finished = true;
        exec.gen++;
        NodeRef ref{exec.job, exec.node};
        JobRuntime& job = jobs_[exec.job];
        log_transfer_attempt(ref, exec.attempt, AttemptOutcome::Success,
                             queue_.now() - exec.attempt_start);
        job.nodes[exec.node].live_exec = kNoExec;
        if (node_kind(job, ref.node) == NodeKind::StageIn) {
            sites_[job.site].disk_used_mb += job.stagein_mb;
            job.disk_footprint_mb += job.stagein_mb;
        }
        node_completed(ref);
    }

    void on_ftsh_timeout(std::uint64_t exec_id, std::uint64_t gen) {
        TransferExec& exec = transfer_execs_[exec_id];
        if (gen != exec.gen || exec.finished) return;
        if (exec.active) {
            channels_[exec.channel].remove(exec_id, queue_.now());
            exec.active = false;
            reschedule_channel(exec.channel);
        }
        exec.gen++;
        NodeRef ref{exec.job, exec.node};
        log_transfer_attempt(ref, exec.attempt, AttemptOutcome::TimedOut,
                             queue_.now() - exec.attempt_start);
        RetrySpec spec = effective_ftsh();
        if (exec.attempt < spec.max_attempts) {
            double backoff = spec.backoff_after(exec.attempt);
            queue_.schedule(queue_.now() + backoff, kEvFtshRetry, exec_id, exec.gen);
        } else {
            jobs_[exec.job].nodes[exec.node].live_exec = kNoExec;
            node_failed(ref, std::string(cause::kTransferFail));
        }
    }

    void on_ftsh_retry(std::uint64_t exec_id, std::uint64_t gen) {
        TransferExec& exec = transfer_execs_[exec_id];
        if (gen != exec.gen || exec.finished) return;
        JobRuntime& job = jobs_[exec.job];
        if (!sites_[job.site].up) {
            // The endpoint died between attempts; hand the node back for
            // redispatch once the site returns.
            exec.gen++;
            job.nodes[exec.node].live_exec = kNoExec;
            node_lost(NodeRef{exec.job, exec.node}, std::string(cause::kOutageKill));
            return;
        }
        begin_attempt(exec_id);
    }

    void log_transfer_attempt(const NodeRef& ref, int attempt, AttemptOutcome outcome,
                              double elapsed) {
        const JobRuntime& job = jobs_[ref.job];
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, queue_.now());
            logfmt::append_str(line, "ev", "XFER");
            logfmt::append_str(line, "job", job.job_id);
            logfmt::append_str(line, "node", node_name(job, ref.node));
            logfmt::append_int(line, "attempt", attempt);
            logfmt::append_str(line, "outcome", to_string(outcome));
            logfmt::append_num(line, "elapsed", elapsed);
            write_line(line);
        }
        LogRecord rec;
        rec.type = LogRecord::Type::Transfer;
        rec.t = queue_.now();
        rec.master = job.master;
        rec.job = ref.job;
        rec.node = ref.node;
        rec.site = job.site;
        rec.attempt = attempt;
        rec.cause = to_string(outcome);
        rec.value = elapsed;
        keep(std::move(rec));
    }

    // ----- node state transitions ---------------------------------------------

    void node_completed(const NodeRef& ref) {
        JobRuntime& job = jobs_[ref.job];
        NodeRuntime& node = job.nodes[ref.node];
        NodeState from = node.rs.state;
        node.rs.state = NodeState::Completed;
        log_node_transition(ref, from, NodeState::Completed, "");
        release_slot(job);

        NodeKind kind = node_kind(job, ref.node);
        if (kind == NodeKind::StageOut) {
            job.stageout_completed = true;
            SiteRuntime& site = sites_[job.site];
            site.events_completed += job.events;
            RequestRuntime& rr = requests_[job.request];
            rr.stats_events_completed += job.events;
            result_.completions.push_back(
                {queue_.now(), job.events, job.site, job.request});
        }
        if (kind == NodeKind::Cleanup) {
            SiteRuntime& site = sites_[job.site];
            site.disk_used_mb -= job.disk_footprint_mb;
            if (site.disk_used_mb < 0) site.disk_used_mb = 0;
            job.disk_footprint_mb = 0;
            job.all_done = true;
            if (job.abandoned)
                requests_[job.request].stats_jobs_abandoned++;
            else
                requests_[job.request].stats_jobs_completed++;
            return;
        }

        int next = ref.node + 1;
        if (next < static_cast<int>(job.nodes.size())) {
            if (job.abandoned) return; // cascade already routed to cleanup
            set_ready({ref.job, next});
        }
    }

    void node_failed(const NodeRef& ref, const std::string& failure_cause) {
        JobRuntime& job = jobs_[ref.job];
        NodeRuntime& node = job.nodes[ref.node];
        NodeState from = node.rs.state;
        release_slot(job);
        NextAction action =
            handle_outcome(node.rs, {OutcomeKind::Failure, failure_cause}, sc_.retry);
        log_node_transition(ref, from, NodeState::Failed, failure_cause);
        if (node.rs.retry_loop_flagged && !node.loop_logged) {
            node.loop_logged = true;
            result_.retry_loops_flagged++;
            log_simple(LogRecord::Type::RetryLoop, "RETRY_LOOP", ref, failure_cause,
                       node.rs.attempts);
        }
        if (action == NextAction::Abandon) {
            log_node_transition(ref, NodeState::Failed, NodeState::Abandoned, failure_cause);
            abandon_job(ref);
        } else {
            node.rs.state = NodeState::Failed; // transition through Failed in the log
            set_ready(ref);
        }
    }

    void node_lost(const NodeRef& ref, const std::string& why) {
        JobRuntime& job = jobs_[ref.job];
        NodeRuntime& node = job.nodes[ref.node];
        NodeState from = node.rs.state;
        release_slot(job);
        NextAction action = handle_outcome(node.rs, {OutcomeKind::Lost, why}, sc_.retry);
        (void)action; // lost contact always resubmits
        log_node_transition(ref, from, NodeState::Failed, why);
        node.rs.state = NodeState::Failed;
        set_ready(ref);
    }

    void abandon_job(const NodeRef& failed) {
        JobRuntime& job = jobs_[failed.job];
        job.abandoned = true;
        int cleanup_index = static_cast<int>(job.nodes.size()) - 1;
        for (int n = 0; n < cleanup_index; ++n) {
            NodeRuntime& node = job.nodes[n];
            if (n == failed.node || is_terminal(node.rs.state)) continue;
            if (node.rs.state != NodeState::Idle) continue; // in flight elsewhere
            node.rs.state = NodeState::Abandoned;
            log_node_transition({failed.job, n}, NodeState::Idle, NodeState::Abandoned,
                                "UPSTREAM_" + job.nodes[failed.node].rs.last_failure_cause);
        }
        // Leftover state is removed even when the chain failed: cleanup runs
        // on a failure-tolerant dependency.
        NodeRuntime& cleanup = job.nodes[cleanup_index];
        if (cleanup.rs.state == NodeState::Idle && failed.node != cleanup_index)
            set_ready({failed.job, cleanup_index});
        if (failed.node == cleanup_index) {
            // Cleanup itself was abandoned; nothing else to do.
            requests_[job.request].stats_jobs_abandoned++;
            job.all_done = true;
        }
    }

    // ----- failure injection ----------------------------------------------------

    enum class WasteKind { Superseded, Killed, FailedRun };

    void add_waste(int site, double cpu_seconds, WasteKind kind) {
        sites_[site].wasted_cpu_s += cpu_seconds;
        result_.wasted_cpu_seconds += cpu_seconds;
        switch (kind) {
        case WasteKind::Superseded: result_.wasted_superseded_s += cpu_seconds; break;
        case WasteKind::Killed: result_.wasted_killed_s += cpu_seconds; break;
        case WasteKind::FailedRun: result_.wasted_failed_s += cpu_seconds; break;
        }
    }

    void on_site_change(int site_index) {
        SiteRuntime& site = sites_[site_index];
        bool should_be_up = site_should_be_up(site, queue_.now());
        if (should_be_up == site.up) return;
        site.up = should_be_up;
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, queue_.now());
            logfmt::append_str(line, "ev", "SITE");
            logfmt::append_str(line, "site", site.cfg.name);
            logfmt::append_int(line, "up", site.up ? 1 : 0);
            write_line(line);
        }
        LogRecord rec;
        rec.type = LogRecord::Type::SiteChange;
        rec.t = queue_.now();
        rec.site = site_index;
        rec.value = site.up ? 1.0 : 0.0;
        keep(std::move(rec));

        if (!site.up) {
            kill_site(site_index);
        } else {
            // Wake every master that parked work for this site.
            for (std::size_t m = 0; m < masters_.size(); ++m) {
                auto it = masters_[m].blocked_on_site.find(site_index);
                if (it == masters_[m].blocked_on_site.end()) continue;
                requeue_front(masters_[m], it->second);
                schedule_scan(static_cast<int>(m));
            }
        }
    }

    /// Power-failure semantics: running and queued executions die, active
    /// transfers to the site break off, admissions stop. Masters notice each
    /// loss after the detection delay.
    void kill_site(int site_index) {
        SiteRuntime& site = sites_[site_index];

        std::vector<std::uint64_t> victims;
        for (std::uint64_t id = 0; id < run_execs_.size(); ++id) {
            RunExec& exec = run_execs_[id];
            if (exec.site == site_index && !exec.finished && (exec.running || queued(id)))
                victims.push_back(id);
        }
        for (std::uint64_t id : victims) {
            RunExec& exec = run_execs_[id];
            bool was_running = exec.running;
            double elapsed = was_running ? queue_.now() - exec.start : 0.0;
            exec.gen++; // cancels completion and pending lost-detect events
            exec.finished = true;
            exec.running = false;
            if (was_running && !exec.is_cleanup) {
                site.busy--;
                add_waste(site_index, elapsed, WasteKind::Killed);
            }
            JobRuntime& job = jobs_[exec.job];
            if (exec.superseded) continue; // master had already written it off
            if (job.nodes[exec.node].live_exec != id) continue;
            job.nodes[exec.node].live_exec = kNoExec;
            node_lost({exec.job, exec.node}, std::string(cause::kOutageKill));
        }
        site.batch_queue.clear();

        for (std::uint64_t id = 0; id < transfer_execs_.size(); ++id) {
            TransferExec& exec = transfer_execs_[id];
            if (exec.finished) continue;
            JobRuntime& job = jobs_[exec.job];
            if (job.site != site_index) continue;
            if (job.nodes[exec.node].live_exec != id) continue;
            if (exec.active) {
                channels_[exec.channel].remove(id, queue_.now());
                reschedule_channel(exec.channel);
            }
            exec.active = false;
            exec.finished = true;
            exec.gen++;
            job.nodes[exec.node].live_exec = kNoExec;
            node_lost({exec.job, exec.node}, std::string(cause::kOutageKill));
        }
    }

    bool queued(std::uint64_t run_exec_id) const {
        const RunExec& exec = run_execs_[run_exec_id];
        const auto& q = sites_[exec.site].batch_queue;
        return std::find(q.begin(), q.end(), run_exec_id) != q.end();
    }

    // ----- monitoring / bookkeeping ----------------------------------------------

    void on_monitor_sample() {
        for (const auto& site : sites_) {
            MetricSample s;
            s.site = site.cfg.name;
            s.time_s = queue_.now();
            s.cpus_busy = site.busy;
            s.queue_length = static_cast<int>(site.batch_queue.size());
            s.events_completed_cumulative = site.events_completed;
            s.wasted_cpu_seconds_cumulative = site.wasted_cpu_s;
            s.fresh = site.up;
            result_.samples.push_back(std::move(s));
        }
    }

    void on_gridmap_sync() {
        sync_epoch_++;
        gridmap_ = GridmapSnapshot::from_directory(directory_);
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, queue_.now());
            logfmt::append_str(line, "ev", "SYNC");
            logfmt::append_int(line, "epoch", sync_epoch_);
            write_line(line);
        }
        LogRecord rec;
        rec.type = LogRecord::Type::Sync;
        rec.t = queue_.now();
        rec.value = sync_epoch_;
        keep(std::move(rec));
        for (std::size_t m = 0; m < masters_.size(); ++m) {
            if (masters_[m].blocked_on_auth.empty()) continue;
            requeue_front(masters_[m], masters_[m].blocked_on_auth);
            schedule_scan(static_cast<int>(m));
        }
    }

    void handle(const SimEvent& ev) {
        switch (ev.kind) {
        case kEvSubmitJob: on_submit(static_cast<int>(ev.a)); break;
        case kEvDispatchScan: on_dispatch_scan(static_cast<int>(ev.a)); break;
        case kEvChannelCompletion: on_channel_completion(static_cast<int>(ev.a), ev.b); break;
        case kEvFtshTimeout: on_ftsh_timeout(ev.a, ev.b); break;
        case kEvFtshRetry: on_ftsh_retry(ev.a, ev.b); break;
        case kEvRunComplete: on_run_complete(ev.a, ev.b); break;
        case kEvLostDetect: on_lost_detect(ev.a, ev.b); break;
        case kEvSiteChange: on_site_change(static_cast<int>(ev.a)); break;
        case kEvMonitorSample: on_monitor_sample(); break;
        case kEvGridmapSync: on_gridmap_sync(); break;
        case kEvHorizon: horizon_reached_ = true; break;
        }
    }

    void finalize() {
        result_.horizon_s = horizon_s_;
        result_.seed = seed_;
        for (const auto& site : sites_) result_.site_names.push_back(site.cfg.name);
        for (std::size_t r = 0; r < requests_.size(); ++r) {
            RequestStats stats;
            stats.id = requests_[r].cfg.id;
            stats.events_requested = requests_[r].cfg.events;
            stats.jobs = static_cast<int>(requests_[r].job_indices.size());
            stats.events_completed = requests_[r].stats_events_completed;
            stats.jobs_completed = requests_[r].stats_jobs_completed;
            stats.jobs_abandoned = requests_[r].stats_jobs_abandoned;
            stats.useful_ghz_seconds = requests_[r].stats_useful_ghz_s;
            for (int j : requests_[r].job_indices) {
                const JobRuntime& job = jobs_[j];
                if (job.all_done) continue;
                stats.jobs_truncated++;
                if (!job.submitted) continue; // never entered the system
                for (int n = 0; n < static_cast<int>(job.nodes.size()); ++n) {
                    if (is_terminal(job.nodes[n].rs.state)) continue;
                    if (job.nodes[n].rs.state == NodeState::Idle) continue;
                    log_simple(LogRecord::Type::Truncated, "TRUNCATED", {j, n},
                               std::string(cause::kHorizon), 0.0);
                }
            }
            result_.requests.push_back(std::move(stats));
        }
        for (const auto& m : masters_) {
            MasterStats stats;
            stats.id = m.cfg.master_id;
            stats.max_concurrent_tracked = m.max_tracked_seen;
            stats.saturation_incidents = m.saturation_incidents;
            stats.dispatches = m.dispatches;
            stats.jobs_assigned = m.jobs_assigned;
            result_.masters.push_back(std::move(stats));
        }
        result_.replicas = register_replicas();
        if (opt_.event_log) {
            std::string line;
            logfmt::append_time(line, horizon_s_);
            logfmt::append_str(line, "ev", "END");
            long long events = 0;
            for (const auto& r : result_.requests) events += r.events_completed;
            logfmt::append_int(line, "events_completed", events);
            logfmt::append_int(line, "replicas", static_cast<long long>(result_.replicas.size()));
            logfmt::append_num(line, "wasted_cpu_s", result_.wasted_cpu_seconds);
            write_line(line);
        }
    }

    struct RequestRuntime {
        RequestConfig cfg;
        PipelineSpec pipeline;
        std::vector<int> job_indices;
        long long stats_events_completed = 0;
        int stats_jobs_completed = 0;
        int stats_jobs_abandoned = 0;
        double stats_useful_ghz_s = 0.0;
    };

    Scenario sc_;
    EngineOptions opt_;
    std::uint64_t seed_ = 0;
    double horizon_s_ = 0.0;
    bool running_ = false;
    bool horizon_reached_ = false;

    EventQueue queue_;
    std::vector<SiteRuntime> sites_;
    std::vector<MasterRuntime> masters_;
    std::vector<SharedChannel> channels_;
    std::vector<RequestRuntime> requests_;
    std::vector<JobRuntime> jobs_;
    std::vector<RunExec> run_execs_;
    std::vector<TransferExec> transfer_execs_;
    std::vector<double> transfer_sizes_;
    std::vector<std::string> dns_;
    UserDirectory directory_;
    GridmapSnapshot gridmap_;
    long long sync_epoch_ = 0;
    int next_master_ = 0;
    std::size_t next_site_rr_ = 0;
    std::vector<long long> assigned_counts_;
    std::vector<int> last_eligible_;
    int grid_tracked_ = 0;

    RngStream hang_rng_, disk_rng_, lost_rng_, lost_time_rng_;

    CampaignResult result_;
    std::vector<LogRecord> records_;
};

} // namespace igt
