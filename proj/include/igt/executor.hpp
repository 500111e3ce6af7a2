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
#include <string_view>

namespace igt {

/// One submit host. Remote executions are tracked one thread per process, so
/// a master can follow at most max_tracked_processes nodes at a time; beyond
/// that, ready nodes wait and a saturation incident is recorded.
struct MasterConfig {
    std::string master_id;
    int max_tracked_processes = 400;
};

enum class FailureClass { Transient, Permanent, Unknown };

/// Failure cause tags used across the executor and the event log.
namespace cause {
inline constexpr std::string_view kDiskFull = "DISK_FULL";
inline constexpr std::string_view kTransferFail = "TRANSFER_FAIL";
inline constexpr std::string_view kLostContact = "LOST_CONTACT";
inline constexpr std::string_view kOutageKill = "OUTAGE_KILL";
inline constexpr std::string_view kAppError = "APP_ERROR";
inline constexpr std::string_view kSiteDown = "SITE_DOWN";
inline constexpr std::string_view kAuthDenied = "AUTH_DENIED";
inline constexpr std::string_view kHorizon = "HORIZON";
} // namespace cause

/// Automatic resubmission policy. The real system restarted failed jobs
/// blindly, which hid persistent causes; a loop threshold surfaces a node
/// failing the same way over and over, and `unbounded` reproduces the
/// infinite-restart pathology deliberately.
struct RetryPolicy {
    int max_attempts = 5;
    bool unbounded = false;
    int loop_threshold = 3;

    FailureClass classify(std::string_view failure_cause) const {
        if (failure_cause == cause::kDiskFull) return FailureClass::Permanent;
        if (failure_cause == cause::kTransferFail || failure_cause == cause::kLostContact ||
            failure_cause == cause::kOutageKill || failure_cause == cause::kSiteDown)
            return FailureClass::Transient;
        return FailureClass::Unknown;
    }

    bool allows_retry(int attempts_so_far) const {
        return unbounded || attempts_so_far < max_attempts;
    }
};

enum class NodeState { Idle, Ready, Dispatched, Running, Completed, Failed, Abandoned };

inline const char* to_string(NodeState s) {
    switch (s) {
    case NodeState::Idle: return "Idle";
    case NodeState::Ready: return "Ready";
    case NodeState::Dispatched: return "Dispatched";
    case NodeState::Running: return "Running";
    case NodeState::Completed: return "Completed";
    case NodeState::Failed: return "Failed";
    case NodeState::Abandoned: return "Abandoned";
    }
    return "?";
}

inline bool is_terminal(NodeState s) {
    return s == NodeState::Completed || s == NodeState::Abandoned;
}

/// Mutable run state of one DAG node, owned by the executor.
struct NodeRunState {
    NodeState state = NodeState::Idle;
    int attempts = 0; // dispatch count
    double wasted_cpu_seconds = 0.0;
    std::string last_failure_cause;
    int same_cause_streak = 0;
    bool retry_loop_flagged = false;
};

enum class OutcomeKind { Success, Failure, Lost };

/// Terminal report for one execution of a node. Lost means contact with the
/// remote process was lost while it may still be alive.
struct ExecutionOutcome {
    OutcomeKind kind = OutcomeKind::Success;
    std::string failure_cause;
};

enum class NextAction { Complete, Resubmit, ResubmitAsDuplicate, Abandon };

/// Applies an execution outcome to a node per the resubmission policy.
/// Success completes the node. Failure resubmits while attempts remain,
/// otherwise abandons with the recorded cause. Lost resubmits and tells the
/// caller the superseded execution may still finish elsewhere; if it does,
/// its CPU time is waste and exactly one completion counts.
/// Reporting an outcome for a node already in a terminal state is an error.
inline NextAction handle_outcome(NodeRunState& node, const ExecutionOutcome& outcome,
                                 const RetryPolicy& policy) {
    if (is_terminal(node.state))
        throw std::logic_error("outcome reported for a node in a terminal state");

    if (outcome.kind == OutcomeKind::Success) {
        node.state = NodeState::Completed;
        return NextAction::Complete;
    }

    if (outcome.failure_cause == node.last_failure_cause)
        node.same_cause_streak++;
    else
        node.same_cause_streak = 1;
    node.last_failure_cause = outcome.failure_cause;
    if (node.same_cause_streak >= policy.loop_threshold) node.retry_loop_flagged = true;

    if (outcome.kind == OutcomeKind::Lost) {
        // Losing contact is not evidence the work itself is bad; the master
        // resubmits unconditionally while the original may still be running.
        node.state = NodeState::Ready;
        return NextAction::ResubmitAsDuplicate;
    }
    if (!policy.allows_retry(node.attempts)) {
        node.state = NodeState::Abandoned;
        return NextAction::Abandon;
    }
    node.state = NodeState::Ready;
    return NextAction::Resubmit;
}

} // namespace igt
