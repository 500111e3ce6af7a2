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

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "igt/engine.hpp"
#include "igt/monitor.hpp"
#include "igt/scenario.hpp"

namespace igt {

struct CampaignArtifacts {
    CampaignResult result;
    EfficiencyReport efficiency;
    double ceiling_events_per_day = 0.0;
    double formula_ceiling_events_per_day = 0.0;
    std::string tracked_request; // empty = all requests
};

/// Completions restricted to the headline series the scenario tracks.
inline std::vector<CompletionRecord> tracked_completions(const Scenario& sc,
                                                         const CampaignResult& result) {
    if (!sc.monitor.tracked_request) return result.completions;
    int request_index = -1;
    for (std::size_t r = 0; r < sc.requests.size(); ++r)
        if (sc.requests[r].id == *sc.monitor.tracked_request)
            request_index = static_cast<int>(r);
    std::vector<CompletionRecord> out;
    for (const auto& c : result.completions)
        if (c.request_index == request_index) out.push_back(c);
    return out;
}

/// Throughput ceiling used as the efficiency denominator: the declared
/// scenario constant when present, otherwise the capacity formula over the
/// full roster and the tracked pipeline.
inline double resolve_ceiling(const Scenario& sc) {
    if (sc.monitor.ceiling_events_per_day) return *sc.monitor.ceiling_events_per_day;
    std::vector<SiteCapacity> caps;
    for (const auto& s : sc.sites) caps.push_back({s.name, s.worker_cpus, s.cpu_speed_ghz});
    std::string pipeline_id = sc.requests.empty() ? "" : sc.requests.front().pipeline;
    if (sc.monitor.tracked_request) {
        if (const RequestConfig* rc = sc.find_request(*sc.monitor.tracked_request))
            pipeline_id = rc->pipeline;
    }
    return theoretical_max_events_per_day(caps, sc.build_pipeline(pipeline_id));
}

inline EfficiencyReport compute_efficiency(const Scenario& sc, const CampaignResult& result,
                                           int windows_override = 0) {
    int windows = windows_override > 0 ? windows_override : sc.monitor.windows;
    return efficiency_report(tracked_completions(sc, result), 0.0, result.horizon_s, windows,
                             resolve_ceiling(sc));
}

namespace detail {

inline std::string fixed(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

} // namespace detail

/// progress.csv: one row per sampling instant, cumulative completed events
/// per site plus the grid total. A stale column means the site was down and
/// the value is carried forward.
inline void write_progress_csv(std::ostream& out, const CampaignResult& result) {
    out << "time_s,time_days";
    for (const auto& site : result.site_names) out << "," << site;
    out << ",total,stale_sites\n";
    std::map<double, std::vector<const MetricSample*>> by_time;
    for (const auto& s : result.samples) by_time[s.time_s].push_back(&s);
    for (const auto& [t, samples] : by_time) {
        long long total = 0;
        int stale = 0;
        out << detail::fixed(t, 0) << "," << detail::fixed(t / kSecondsPerDay, 4);
        for (const auto* s : samples) {
            total += s->events_completed_cumulative;
            if (!s->fresh) ++stale;
            out << "," << s->events_completed_cumulative;
        }
        out << "," << total << "," << stale << "\n";
    }
}

inline void write_efficiency_csv(std::ostream& out, const EfficiencyReport& report) {
    out << "window,start_day,end_day,events,avg_daily_events,efficiency\n";
    for (std::size_t w = 0; w < report.windows.size(); ++w) {
        const auto& win = report.windows[w];
        out << (w + 1) << "," << detail::fixed(win.start_s / kSecondsPerDay, 4) << ","
            << detail::fixed(win.end_s / kSecondsPerDay, 4) << "," << win.events << ","
            << detail::fixed(win.avg_daily_events, 3) << "," << detail::fixed(win.efficiency, 6)
            << "\n";
    }
}

inline void write_replicas(std::ostream& out, const CampaignResult& result) {
    for (const auto& r : result.replicas)
        out << r.job_id << " files=" << r.file_count << " mb=" << detail::fixed(r.total_mb, 3)
            << "\n";
}

inline json summary_json(const Scenario& sc, const CampaignArtifacts& artifacts) {
    const CampaignResult& result = artifacts.result;
    json summary;
    summary["scenario"] = sc.name;
    summary["seed"] = result.seed;
    summary["duration_days"] = result.horizon_s / kSecondsPerDay;
    long long requested = 0, completed = 0;
    int jobs = 0, jobs_completed = 0, jobs_abandoned = 0, jobs_truncated = 0;
    json requests = json::array();
    for (const auto& r : result.requests) {
        requested += r.events_requested;
        completed += r.events_completed;
        jobs += r.jobs;
        jobs_completed += r.jobs_completed;
        jobs_abandoned += r.jobs_abandoned;
        jobs_truncated += r.jobs_truncated;
        requests.push_back({{"id", r.id},
                            {"events_requested", r.events_requested},
                            {"events_completed", r.events_completed},
                            {"jobs", r.jobs},
                            {"jobs_completed", r.jobs_completed},
                            {"jobs_abandoned", r.jobs_abandoned},
                            {"jobs_truncated", r.jobs_truncated},
                            {"useful_ghz_hours", r.useful_ghz_seconds / 3600.0}});
    }
    summary["requests"] = requests;
    summary["totals"] = {{"events_requested", requested},
                         {"events_completed", completed},
                         {"jobs", jobs},
                         {"jobs_completed", jobs_completed},
                         {"jobs_abandoned", jobs_abandoned},
                         {"jobs_truncated", jobs_truncated},
                         {"replicas_registered", result.replicas.size()}};
    summary["wasted_cpu_seconds"] = {{"total", result.wasted_cpu_seconds},
                                     {"superseded_duplicates", result.wasted_superseded_s},
                                     {"outage_kills", result.wasted_killed_s},
                                     {"failed_runs", result.wasted_failed_s}};
    json masters = json::array();
    long long saturation = 0;
    for (const auto& m : result.masters) {
        saturation += m.saturation_incidents;
        masters.push_back({{"id", m.id},
                           {"jobs_assigned", m.jobs_assigned},
                           {"max_concurrent_tracked", m.max_concurrent_tracked},
                           {"saturation_incidents", m.saturation_incidents},
                           {"dispatches", m.dispatches}});
    }
    summary["masters"] = masters;
    summary["saturation_incidents"] = saturation;
    summary["auth_denials"] = result.auth_denials;
    summary["retry_loops_flagged"] = result.retry_loops_flagged;
    json eff;
    eff["ceiling_events_per_day"] = artifacts.ceiling_events_per_day;
    eff["formula_ceiling_events_per_day"] = artifacts.formula_ceiling_events_per_day;
    eff["tracked_request"] = artifacts.tracked_request;
    eff["overall"] = artifacts.efficiency.overall_efficiency;
    json windows = json::array();
    for (const auto& w : artifacts.efficiency.windows)
        windows.push_back({{"start_day", w.start_s / kSecondsPerDay},
                           {"end_day", w.end_s / kSecondsPerDay},
                           {"events", w.events},
                           {"avg_daily_events", w.avg_daily_events},
                           {"efficiency", w.efficiency}});
    eff["windows"] = windows;
    summary["efficiency"] = eff;
    return summary;
}

/// Plot-ready JSON series of the tracked progress curve.
inline json progress_series_json(const Scenario& sc, const CampaignResult& result) {
    json series;
    series["scenario"] = sc.name;
    series["tracked_request"] = sc.monitor.tracked_request.value_or("");
    json points = json::array();
    long long cumulative = 0;
    for (const auto& c : tracked_completions(sc, result)) {
        cumulative += c.events;
        points.push_back({{"t_days", c.time_s / kSecondsPerDay}, {"events", cumulative}});
    }
    series["points"] = points;
    return series;
}

/// Runs a campaign and writes the artifact set into out_dir:
/// events.log, progress.csv, efficiency.csv, replicas.txt, summary.json,
/// progress.json.
inline CampaignArtifacts run_campaign_to_dir(const Scenario& sc,
                                             const std::filesystem::path& out_dir,
                                             std::optional<std::uint64_t> seed_override = {},
                                             int windows_override = 0) {
    std::filesystem::create_directories(out_dir);
    std::ofstream event_log(out_dir / "events.log");
    if (!event_log) throw std::runtime_error("cannot write " + (out_dir / "events.log").string());

    EngineOptions opt;
    opt.event_log = &event_log;
    opt.seed_override = seed_override;
    CampaignEngine engine(sc, opt);

    CampaignArtifacts artifacts;
    artifacts.result = engine.run();
    artifacts.ceiling_events_per_day = resolve_ceiling(sc);
    {
        std::vector<SiteCapacity> caps;
        for (const auto& s : sc.sites) caps.push_back({s.name, s.worker_cpus, s.cpu_speed_ghz});
        std::string pipeline_id = sc.requests.empty() ? "" : sc.requests.front().pipeline;
        if (sc.monitor.tracked_request)
            if (const RequestConfig* rc = sc.find_request(*sc.monitor.tracked_request))
                pipeline_id = rc->pipeline;
        artifacts.formula_ceiling_events_per_day =
            theoretical_max_events_per_day(caps, sc.build_pipeline(pipeline_id));
    }
    artifacts.tracked_request = sc.monitor.tracked_request.value_or("");
    artifacts.efficiency = compute_efficiency(sc, artifacts.result, windows_override);

    std::ofstream progress(out_dir / "progress.csv");
    write_progress_csv(progress, artifacts.result);
    std::ofstream efficiency(out_dir / "efficiency.csv");
    write_efficiency_csv(efficiency, artifacts.efficiency);
    std::ofstream replicas(out_dir / "replicas.txt");
    write_replicas(replicas, artifacts.result);
    std::ofstream summary(out_dir / "summary.json");
    summary << summary_json(sc, artifacts).dump(2) << "\n";
    std::ofstream series(out_dir / "progress.json");
    series << progress_series_json(sc, artifacts.result).dump() << "\n";
    return artifacts;
}

} // namespace igt
