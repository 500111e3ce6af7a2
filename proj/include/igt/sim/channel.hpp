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

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace igt {

/// Static description of one master<->site link.
struct ChannelSpec {
    std::string master;
    std::string site;
    double bandwidth_mb_s = 10.0;
    double latency_s = 1.0;
    /// Per-attempt hang probability, indexed by transfer attempt (1-based);
    /// the last entry applies to all later attempts. A hung transfer makes no
    /// progress and never completes on its own.
    std::vector<double> hang_attempt_probabilities{0.0};

    double hang_probability_for_attempt(int attempt) const {
        if (hang_attempt_probabilities.empty()) return 0.0;
        std::size_t idx = static_cast<std::size_t>(attempt - 1);
        if (idx >= hang_attempt_probabilities.size()) idx = hang_attempt_probabilities.size() - 1;
        return hang_attempt_probabilities[idx];
    }

    /// Duration of an uncontended, non-hung transfer.
    double solo_duration_s(double size_mb) const { return latency_s + size_mb / bandwidth_mb_s; }
};

/// Processor-sharing link model: active transfers split the bandwidth
/// equally, so n concurrent equal transfers each take n times the solo
/// duration. Per-file latency is folded in as bandwidth-equivalent work,
/// which keeps that sharing identity exact. Hung transfers are not active
/// here; they simply never finish.
class SharedChannel {
public:
    explicit SharedChannel(ChannelSpec spec) : spec_(std::move(spec)) {
        if (spec_.bandwidth_mb_s <= 0) throw std::invalid_argument("bandwidth must be > 0");
        if (spec_.latency_s < 0) throw std::invalid_argument("latency must be >= 0");
    }

    const ChannelSpec& spec() const { return spec_; }
    std::size_t active_count() const { return active_.size(); }
    std::uint64_t generation() const { return generation_; }

    /// Admits a transfer of size_mb payload. Returns the new generation; any
    /// previously scheduled completion estimate for this channel is stale.
    std::uint64_t add(std::uint64_t transfer_id, double size_mb, double now) {
        if (size_mb < 0) throw std::invalid_argument("transfer size must be >= 0");
        settle(now);
        active_.push_back({transfer_id, size_mb + spec_.latency_s * spec_.bandwidth_mb_s});
        return ++generation_;
    }

    /// Removes a transfer (cancellation). Returns the new generation.
    std::uint64_t remove(std::uint64_t transfer_id, double now) {
        settle(now);
        for (std::size_t i = 0; i < active_.size(); ++i) {
            if (active_[i].transfer_id == transfer_id) {
                active_.erase(active_.begin() + i);
                return ++generation_;
            }
        }
        return ++generation_;
    }

    /// Earliest time any active transfer finishes, given no further changes.
    /// Never returns `now` itself: the result is at least one representable
    /// clock step ahead, so completion events always make progress.
    std::optional<double> next_completion_time(double now) const {
        if (active_.empty()) return std::nullopt;
        double min_left = active_.front().work_left_mb;
        for (const auto& t : active_) min_left = std::min(min_left, t.work_left_mb);
        double elapsed = now - last_update_;
        double already = elapsed * rate();
        double remaining = min_left - already;
        if (remaining < 0) remaining = 0;
        double t = now + remaining / rate();
        double step_ahead = std::nextafter(now, std::numeric_limits<double>::infinity());
        return std::max(t, step_ahead);
    }

    /// Advances shared progress to `now` and pops every transfer that has
    /// drained. Generation must match the scheduling-time generation or the
    /// completion event is stale and the caller should ignore it.
    /// Work within one clock step of done counts as done: below that, the
    /// residual is not representable as a future completion time.
    std::vector<std::uint64_t> collect_completed(double now) {
        settle(now);
        std::vector<std::uint64_t> done;
        if (active_.empty()) return done;
        double step = std::nextafter(now, std::numeric_limits<double>::infinity()) - now;
        double slack = std::max(kEpsilonMb, 4.0 * step * rate());
        for (std::size_t i = 0; i < active_.size();) {
            if (active_[i].work_left_mb <= slack) {
                done.push_back(active_[i].transfer_id);
                active_.erase(active_.begin() + i);
            } else {
                ++i;
            }
        }
        if (!done.empty()) ++generation_;
        return done;
    }

    std::uint64_t bump_generation() { return ++generation_; }

private:
    static constexpr double kEpsilonMb = 1e-7;

    struct Active {
        std::uint64_t transfer_id;
        double work_left_mb;
    };

    double rate() const { return spec_.bandwidth_mb_s / static_cast<double>(active_.size()); }

    void settle(double now) {
        if (!active_.empty() && now > last_update_) {
            double drained = (now - last_update_) * rate();
            for (auto& t : active_) t.work_left_mb -= drained;
        }
        last_update_ = now;
    }

    ChannelSpec spec_;
    std::vector<Active> active_; // insertion order, deterministic
    double last_update_ = 0.0;
    std::uint64_t generation_ = 0;
};

} // namespace igt
