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
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace igt {

/// Timeout/retry semantics for flaky commands: run an action with a per
/// attempt deadline, cancel and retry on expiry, give up after max_attempts.
struct RetrySpec {
    double timeout_s = 300.0;
    int max_attempts = 5;
    double backoff_s = 60.0;
    bool multiplicative_backoff = false; // doubles the pause after each attempt
    double backoff_factor = 2.0;

    void validate() const {
        if (timeout_s <= 0) throw std::invalid_argument("retry timeout must be > 0");
        if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
        if (backoff_s < 0) throw std::invalid_argument("backoff must be >= 0");
    }

    double backoff_after(int attempt_index) const { // 1-based attempt just finished
        if (!multiplicative_backoff) return backoff_s;
        return backoff_s * std::pow(backoff_factor, attempt_index - 1);
    }
};

enum class AttemptOutcome { Success, Fail, TimedOut };

inline const char* to_string(AttemptOutcome o) {
    switch (o) {
    case AttemptOutcome::Success: return "Success";
    case AttemptOutcome::Fail: return "Fail";
    case AttemptOutcome::TimedOut: return "TimedOut";
    }
    return "?";
}

struct AttemptRecord {
    int attempt_index = 0; // 1-based
    double start_time = 0.0;
    double end_time = 0.0;
    AttemptOutcome outcome = AttemptOutcome::Fail;
};

/// What one attempt of the wrapped action would do, as decided by the
/// simulation: finish fine after duration_s, fail after duration_s, or hang
/// forever (duration ignored).
struct AttemptBehavior {
    enum class Kind { Succeed, Fail, Hang };
    Kind kind = Kind::Succeed;
    double duration_s = 0.0;
};

inline AttemptBehavior attempt_succeeds(double duration_s) {
    return {AttemptBehavior::Kind::Succeed, duration_s};
}
inline AttemptBehavior attempt_fails(double duration_s) {
    return {AttemptBehavior::Kind::Fail, duration_s};
}
inline AttemptBehavior attempt_hangs() {
    return {AttemptBehavior::Kind::Hang, std::numeric_limits<double>::infinity()};
}

struct FtshResult {
    bool success = false;
    std::vector<AttemptRecord> attempts;
    double finish_time = 0.0; // start + sum of attempt durations and backoffs

    double elapsed(double start_time) const { return finish_time - start_time; }
};

/// Runs the action under the retry spec against a simulated clock starting at
/// start_time. An attempt that would exceed the deadline is cancelled exactly
/// at the deadline and recorded TimedOut; the first Success short-circuits.
/// Cancellation is instantaneous. Exhausting attempts yields failure with the
/// full history.
inline FtshResult run_with_retry(const std::function<AttemptBehavior(int)>& action,
                                 const RetrySpec& spec, double start_time = 0.0) {
    spec.validate();
    FtshResult result;
    double now = start_time;
    for (int attempt = 1; attempt <= spec.max_attempts; ++attempt) {
        AttemptBehavior behavior = action(attempt);
        AttemptRecord rec;
        rec.attempt_index = attempt;
        rec.start_time = now;
        bool timed_out = behavior.kind == AttemptBehavior::Kind::Hang ||
                         behavior.duration_s > spec.timeout_s;
        if (timed_out) {
            rec.end_time = now + spec.timeout_s;
            rec.outcome = AttemptOutcome::TimedOut;
        } else {
            rec.end_time = now + behavior.duration_s;
            rec.outcome = behavior.kind == AttemptBehavior::Kind::Succeed ? AttemptOutcome::Success
                                                                          : AttemptOutcome::Fail;
        }
        now = rec.end_time;
        result.attempts.push_back(rec);
        if (rec.outcome == AttemptOutcome::Success) {
            result.success = true;
            break;
        }
        if (attempt < spec.max_attempts) now += spec.backoff_after(attempt);
    }
    result.finish_time = now;
    return result;
}

} // namespace igt
