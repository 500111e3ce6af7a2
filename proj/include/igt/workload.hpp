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

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace igt {

/// Clock speed of the machine the built-in executable timings were measured on.
inline constexpr double kReferenceCpuGhz = 0.75;

enum class Boundedness { CPU, IO, Both, Negligible };

inline const char* to_string(Boundedness b) {
    switch (b) {
    case Boundedness::CPU: return "CPU";
    case Boundedness::IO: return "IO";
    case Boundedness::Both: return "Both";
    case Boundedness::Negligible: return "Negligible";
    }
    return "?";
}

/// Per-executable service model: seconds and megabytes per processed event,
/// measured at reference_speed_ghz.
struct StageProfile {
    std::string name;
    double time_per_event_s = 0.0;
    double output_per_event_mb = 0.0;
    Boundedness boundedness = Boundedness::Negligible;
    double reference_speed_ghz = kReferenceCpuGhz;
};

/// Built-in executable table: average per-event behavior of the Monte Carlo
/// production chain on a 750 MHz machine. The ntuple step is quoted as an
/// upper bound; we pin it at 1.0 s/event.
inline const std::vector<StageProfile>& default_stage_table() {
    static const std::vector<StageProfile> table = {
        {"CMKIN", 0.05, 0.05, Boundedness::Negligible, kReferenceCpuGhz},
        {"CMSIM", 350.0, 2.0, Boundedness::CPU, kReferenceCpuGhz},
        {"writeHits", 0.05, 1.0, Boundedness::IO, kReferenceCpuGhz},
        {"writeDigisNoPU", 2.0, 0.3, Boundedness::CPU, kReferenceCpuGhz},
        {"writeDigisPU", 10.0, 3.0, Boundedness::Both, kReferenceCpuGhz},
        {"ntuple", 1.0, 0.05, Boundedness::Both, kReferenceCpuGhz},
    };
    return table;
}

inline const StageProfile* find_stage_profile(std::string_view name) {
    for (const auto& s : default_stage_table())
        if (s.name == name) return &s;
    return nullptr;
}

inline const StageProfile& stage_profile(std::string_view name) {
    const StageProfile* s = find_stage_profile(name);
    if (!s) throw std::invalid_argument("unknown stage: " + std::string(name));
    return *s;
}

/// Canonical position of each stage in the full production chain. The two
/// digitization variants share a slot and are mutually exclusive.
inline int stage_chain_rank(std::string_view name) {
    if (name == "CMKIN") return 0;
    if (name == "CMSIM") return 1;
    if (name == "writeHits") return 2;
    if (name == "writeDigisNoPU" || name == "writeDigisPU") return 3;
    if (name == "ntuple") return 4;
    return -1;
}

struct PipelineSpec {
    std::vector<StageProfile> stages;
    /// Pre-processed pileup events mixed per signal event in the PU
    /// digitization variant. Affects local input volume only.
    double pileup_ratio = 0.0;
};

/// Checks stage ordering and per-stage invariants; throws on violation.
inline void validate_pipeline(const PipelineSpec& p) {
    int prev_rank = -1;
    for (const auto& s : p.stages) {
        if (s.time_per_event_s < 0 || s.output_per_event_mb < 0)
            throw std::invalid_argument("stage " + s.name + ": negative per-event figures");
        if (s.reference_speed_ghz <= 0)
            throw std::invalid_argument("stage " + s.name + ": reference speed must be > 0");
        int rank = stage_chain_rank(s.name);
        if (rank >= 0) {
            if (rank <= prev_rank)
                throw std::invalid_argument("stage " + s.name + " out of chain order");
            prev_rank = rank;
        }
    }
    if (p.pileup_ratio < 0) throw std::invalid_argument("pileup_ratio must be >= 0");
}

struct ProductionRequest {
    std::string request_id;
    long long total_events = 0;
    PipelineSpec pipeline;
    long long chunk_size = 250;
};

/// Inclusive 1-based event range.
struct EventRange {
    long long first = 0;
    long long last = -1;
    long long count() const { return last - first + 1; }
};

/// One schedulable unit of work: a contiguous slice of a request, processed
/// serially through every stage of its pipeline.
struct JobSpec {
    std::string job_id;
    std::string request_id;
    EventRange events;
    PipelineSpec pipeline;
    long long event_count() const { return events.count(); }
};

inline std::string make_job_id(const std::string& request_id, long long index, long long total) {
    int width = 1;
    for (long long n = total; n >= 10; n /= 10) ++width;
    std::string num = std::to_string(index + 1);
    if (static_cast<int>(num.size()) < width) num.insert(0, width - num.size(), '0');
    return request_id + "-j" + num;
}

/// Splits a request into fixed-size jobs. The last job carries the remainder
/// of a non-divisible request; ranges partition [1, total_events] exactly.
inline std::vector<JobSpec> chunk_request(const ProductionRequest& req) {
    if (req.total_events < 0) throw std::invalid_argument("total_events must be >= 0");
    if (req.chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
    std::vector<JobSpec> jobs;
    if (req.total_events == 0) return jobs;
    long long n = (req.total_events + req.chunk_size - 1) / req.chunk_size;
    jobs.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        JobSpec j;
        j.job_id = make_job_id(req.request_id, i, n);
        j.request_id = req.request_id;
        j.events.first = i * req.chunk_size + 1;
        j.events.last = std::min(req.total_events, (i + 1) * req.chunk_size);
        j.pipeline = req.pipeline;
        jobs.push_back(std::move(j));
    }
    return jobs;
}

/// Service time of one stage for `events` events on a CPU of the given clock
/// speed. Time scales inversely with clock speed relative to the speed the
/// stage was profiled at.
inline double stage_cost_s(const StageProfile& s, long long events, double cpu_speed_ghz) {
    if (cpu_speed_ghz <= 0) throw std::invalid_argument("cpu_speed_ghz must be > 0");
    return s.time_per_event_s * static_cast<double>(events) * (s.reference_speed_ghz / cpu_speed_ghz);
}

inline double estimate_job_cost_s(const JobSpec& job, double cpu_speed_ghz) {
    double total = 0.0;
    for (const auto& s : job.pipeline.stages) total += stage_cost_s(s, job.event_count(), cpu_speed_ghz);
    return total;
}

inline double estimate_job_output_mb(const JobSpec& job) {
    double total = 0.0;
    for (const auto& s : job.pipeline.stages)
        total += s.output_per_event_mb * static_cast<double>(job.event_count());
    return total;
}

/// Speed-independent work measure: GHz-seconds per event for a pipeline.
inline double pipeline_ghz_seconds_per_event(const PipelineSpec& p) {
    double total = 0.0;
    for (const auto& s : p.stages) total += s.time_per_event_s * s.reference_speed_ghz;
    return total;
}

/// Local pileup input volume read by the PU digitization variant. Pileup
/// samples are pre-staged simulation output, so their size per event follows
/// the simulation stage's output figure.
inline double estimate_pileup_input_mb(const JobSpec& job) {
    for (const auto& s : job.pipeline.stages) {
        if (s.name == "writeDigisPU") {
            const StageProfile& sim = stage_profile("CMSIM");
            return job.pipeline.pileup_ratio * static_cast<double>(job.event_count()) *
                   sim.output_per_event_mb;
        }
    }
    return 0.0;
}

/// Encapsulates everything needed to describe one application stage, exposing
/// only a metadata dictionary. Configuring a key twice keeps the last value.
class Configurator {
public:
    Configurator() = default;
    explicit Configurator(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    void configure(const std::string& key, const std::string& value) { metadata_[key] = value; }

    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    /// Builds the stage description from the built-in table plus any
    /// metadata overrides (time_per_event_s, output_per_event_mb).
    StageProfile produce() const {
        StageProfile s = stage_profile(name_);
        if (auto it = metadata_.find("time_per_event_s"); it != metadata_.end())
            s.time_per_event_s = std::stod(it->second);
        if (auto it = metadata_.find("output_per_event_mb"); it != metadata_.end())
            s.output_per_event_mb = std::stod(it->second);
        return s;
    }

private:
    std::string name_;
    std::map<std::string, std::string> metadata_;
};

/// Registry and command router for Configurators. The emitted pipeline's
/// stage order is the attach order.
class Linker {
public:
    void attach(Configurator conf) {
        for (const auto& c : configurators_)
            if (c.name() == conf.name())
                throw std::invalid_argument("configurator already attached: " + conf.name());
        command_log_.push_back("attach " + conf.name());
        configurators_.push_back(std::move(conf));
    }

    void configure(const std::string& name, const std::string& key, const std::string& value) {
        for (auto& c : configurators_) {
            if (c.name() == name) {
                c.configure(key, value);
                command_log_.push_back("configure " + name + " " + key + "=" + value);
                return;
            }
        }
        throw std::invalid_argument("no such configurator: " + name);
    }

    const std::vector<Configurator>& configurators() const { return configurators_; }
    const std::vector<std::string>& command_log() const { return command_log_; }

    PipelineSpec emit_pipeline(double pileup_ratio = 0.0) const {
        if (configurators_.empty())
            throw std::logic_error("cannot emit a pipeline from an empty linker");
        PipelineSpec p;
        p.pileup_ratio = pileup_ratio;
        for (const auto& c : configurators_) p.stages.push_back(c.produce());
        validate_pipeline(p);
        return p;
    }

private:
    std::vector<Configurator> configurators_;
    std::vector<std::string> command_log_;
};

} // namespace igt
