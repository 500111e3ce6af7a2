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
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace igt {

/// One scheduled occurrence. `kind` and the payload words are interpreted by
/// the owner; the queue only orders them.
struct SimEvent {
    double time = 0.0;
    std::uint64_t seq = 0; // insertion order, breaks time ties
    int kind = 0;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    double x = 0.0;
};

/// Deterministic discrete-event clock: events come out in strict
/// (time, insertion sequence) order and time never goes backwards.
class EventQueue {
public:
    double now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    std::uint64_t schedule(double time, int kind, std::uint64_t a = 0, std::uint64_t b = 0,
                           double x = 0.0) {
        if (time < now_) throw std::logic_error("cannot schedule an event in the past");
        SimEvent ev{time, next_seq_++, kind, a, b, x};
        heap_.push(ev);
        return ev.seq;
    }

    /// Pops and returns the next event, advancing the clock to its time.
    /// Returns nothing once the queue is drained (end of run).
    std::optional<SimEvent> advance() {
        if (heap_.empty()) return std::nullopt;
        SimEvent ev = heap_.top();
        heap_.pop();
        now_ = ev.time;
        return ev;
    }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

} // namespace igt
