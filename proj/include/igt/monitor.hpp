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

#include <stdexcept>
#include <string>
#include <vector>

#include "igt/workload.hpp"

namespace igt {

inline constexpr double kSecondsPerDay = 86400.0;

/// Local snapshot of one site at one sampling instant. Cumulative fields are
/// monotone per site. `fresh` is false when the site was unreachable and the
/// values are carried forward from the last good sample.
struct MetricSample {
    std::string site;
    double time_s = 0.0;
    int cpus_busy = 0;
    int queue_length = 0;
    long long events_completed_cumulative = 0;
    double wasted_cpu_seconds_cumulative = 0.0;
    bool fresh = true;
};

/// Grid-wide integration of per-site samples. Display only; nothing feeds
/// back into scheduling. Load figures (busy CPUs, queues) sum fresh samples
/// only; cumulative counters carry the last known value so totals never dip
/// when a site drops out.
struct GridView {
    double time_s = 0.0;
    int cpus_busy = 0;
    int queue_length = 0;
    long long events_completed = 0;
    double wasted_cpu_seconds = 0.0;
    std::vector<MetricSample> per_site;
    std::vector<std::string> stale_sites;
    bool all_stale = false;
};

inline GridView aggregate(const std::vector<MetricSample>& samples) {
    GridView view;
    view.per_site = samples;
    bool any_fresh = false;
    for (const auto& s : samples) {
        view.time_s = std::max(view.time_s, s.time_s);
        view.events_completed += s.events_completed_cumulative;
        view.wasted_cpu_seconds += s.wasted_cpu_seconds_cumulative;
        if (s.fresh) {
            any_fresh = true;
            view.cpus_busy += s.cpus_busy;
            view.queue_length += s.queue_length;
        } else {
            view.stale_sites.push_back(s.site);
        }
    }
    view.all_stale = !samples.empty() && !any_fresh;
    return view;
}

/// Capacity descriptor for the throughput ceiling formula.
struct SiteCapacity {
    std::string name;
    int worker_cpus = 0;
    double cpu_speed_ghz = 0.0;
};

/// Events/day the whole grid could complete if every CPU ran the pipeline
/// back to back: total GHz capacity times seconds/day over GHz-seconds per
/// event.
inline double theoretical_max_events_per_day(const std::vector<SiteCapacity>& sites,
                                             const PipelineSpec& pipeline) {
    if (sites.empty()) throw std::invalid_argument("no sites");
    double capacity_ghz = 0.0;
    for (const auto& s : sites) capacity_ghz += static_cast<double>(s.worker_cpus) * s.cpu_speed_ghz;
    if (capacity_ghz <= 0) throw std::invalid_argument("grid has zero capacity");
    double ghz_seconds_per_event = pipeline_ghz_seconds_per_event(pipeline);
    if (ghz_seconds_per_event <= 0) throw std::invalid_argument("pipeline has zero cost");
    return capacity_ghz * kSecondsPerDay / ghz_seconds_per_event;
}

/// One completed-events record, in completion-time order.
struct CompletionRecord {
    double time_s = 0.0;
    long long events = 0;
    int site_index = -1;
    int request_index = -1;
};

struct EfficiencyWindow {
    double start_s = 0.0;
    double end_s = 0.0;
    long long events = 0;
    double avg_daily_events = 0.0;
    double efficiency = 0.0;
};

struct EfficiencyReport {
    std::vector<EfficiencyWindow> windows;
    double theoretical_max_daily = 0.0;
    double overall_efficiency = 0.0;
};

/// Splits [span_start, span_end) into n equal windows and compares each
/// window's average daily completions against the ceiling. The overall
/// figure is the mean of the window efficiencies. `completions` must be
/// sorted by time; records outside the span are ignored.
inline EfficiencyReport efficiency_report(const std::vector<CompletionRecord>& completions,
                                          double span_start, double span_end, int n_windows,
                                          double ceiling_events_per_day) {
    if (n_windows < 1) throw std::invalid_argument("need at least one window");
    if (span_end <= span_start) throw std::invalid_argument("empty campaign span");
    if (ceiling_events_per_day <= 0) throw std::invalid_argument("ceiling must be > 0");

    EfficiencyReport report;
    report.theoretical_max_daily = ceiling_events_per_day;
    double window_len = (span_end - span_start) / n_windows;
    report.windows.resize(static_cast<std::size_t>(n_windows));
    for (int w = 0; w < n_windows; ++w) {
        report.windows[w].start_s = span_start + w * window_len;
        report.windows[w].end_s = span_start + (w + 1) * window_len;
    }
    for (const auto& c : completions) {
        if (c.time_s < span_start || c.time_s >= span_end) continue;
        int w = static_cast<int>((c.time_s - span_start) / window_len);
        if (w >= n_windows) w = n_windows - 1;
        report.windows[w].events += c.events;
    }
    double sum = 0.0;
    for (auto& w : report.windows) {
        double days = (w.end_s - w.start_s) / kSecondsPerDay;
        w.avg_daily_events = static_cast<double>(w.events) / days;
        w.efficiency = w.avg_daily_events / ceiling_events_per_day;
        sum += w.efficiency;
    }
    report.overall_efficiency = sum / n_windows;
    return report;
}

} // namespace igt
