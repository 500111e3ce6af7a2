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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "igt/campaign.hpp"

namespace {

int run_command(const std::string& scenario_path, const std::string& out_dir, bool check_only,
                std::optional<std::uint64_t> seed, int windows) {
    std::ifstream in(scenario_path);
    if (!in) {
        std::cerr << "error: cannot open " << scenario_path << "\n";
        return 2;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    auto parsed = igt::parse_scenario(buffer.str());
    if (!parsed.ok()) {
        std::cerr << scenario_path << ": " << parsed.errors.size() << " error(s)\n";
        for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
        return 2;
    }
    if (check_only) {
        std::cout << scenario_path << ": 0 errors\n";
        const igt::Scenario& sc = *parsed.scenario;
        long long jobs = 0;
        for (const auto& rc : sc.requests)
            jobs += (rc.events + rc.chunk_size - 1) / rc.chunk_size;
        std::printf("  scenario %s: %zu site(s), %zu request(s), %lld job(s), %.1f days\n",
                    sc.name.c_str(), sc.sites.size(), sc.requests.size(), jobs,
                    sc.duration_days);
        return 0;
    }
    if (out_dir.empty()) {
        std::cerr << "error: --out <dir> is required to run a campaign\n";
        return 2;
    }

    try {
        auto artifacts = igt::run_campaign_to_dir(*parsed.scenario, out_dir, seed, windows);
        const auto& result = artifacts.result;
        long long requested = 0, completed = 0;
        int jobs = 0, done = 0, abandoned = 0, truncated = 0;
        for (const auto& r : result.requests) {
            requested += r.events_requested;
            completed += r.events_completed;
            jobs += r.jobs;
            done += r.jobs_completed;
            abandoned += r.jobs_abandoned;
            truncated += r.jobs_truncated;
        }
        std::printf("campaign %s finished: %lld/%lld events, %d/%d jobs completed"
                    " (%d abandoned, %d truncated)\n",
                    parsed.scenario->name.c_str(), completed, requested, done, jobs, abandoned,
                    truncated);
        std::printf("efficiency %.4f of %.1f events/day over %zu windows; wasted cpu %.0f s\n",
                    artifacts.efficiency.overall_efficiency, artifacts.ceiling_events_per_day,
                    artifacts.efficiency.windows.size(), result.wasted_cpu_seconds);
        std::printf("artifacts written to %s\n", out_dir.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"igtsim - deterministic replay of a multi-site Monte Carlo production grid"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    bool check_only = false;
    std::uint64_t seed_value = 0;
    int windows = 0;

    CLI::App* run = app.add_subcommand("run", "execute (or just validate) a scenario");
    run->add_option("scenario", scenario_path, "scenario file (JSON)")->required();
    run->add_option("--out", out_dir, "output directory for campaign artifacts");
    run->add_flag("--check", check_only, "validate the scenario and exit");
    CLI::Option* seed_opt = run->add_option("--seed", seed_value, "override the scenario seed");
    run->add_option("--windows", windows, "override the efficiency window count");

    CLI11_PARSE(app, argc, argv);

    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;
    return run_command(scenario_path, out_dir, check_only, seed, windows);
}
