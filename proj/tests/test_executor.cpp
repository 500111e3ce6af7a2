#include <doctest.h>

#include "igt/executor.hpp"

using namespace igt;

TEST_CASE("success on first attempt completes with zero waste") {
    NodeRunState node;
    node.state = NodeState::Running;
    node.attempts = 1;
    RetryPolicy policy;
    CHECK(handle_outcome(node, {OutcomeKind::Success, ""}, policy) == NextAction::Complete);
    CHECK(node.state == NodeState::Completed);
    CHECK(node.wasted_cpu_seconds == 0.0);
}

TEST_CASE("failures resubmit until attempts run out") {
    RetryPolicy policy;
    policy.max_attempts = 3;
    NodeRunState node;
    for (int attempt = 1; attempt <= 3; ++attempt) {
        node.state = NodeState::Running;
        node.attempts = attempt;
        auto action =
            handle_outcome(node, {OutcomeKind::Failure, std::string(cause::kAppError)}, policy);
        if (attempt < 3) {
            CHECK(action == NextAction::Resubmit);
            CHECK(node.state == NodeState::Ready);
        } else {
            CHECK(action == NextAction::Abandon);
            CHECK(node.state == NodeState::Abandoned);
            CHECK(node.last_failure_cause == cause::kAppError);
        }
    }
}

TEST_CASE("lost contact resubmits while the original may still finish") {
    RetryPolicy policy;
    NodeRunState node;
    node.state = NodeState::Running;
    node.attempts = 1;
    auto action =
        handle_outcome(node, {OutcomeKind::Lost, std::string(cause::kLostContact)}, policy);
    CHECK(action == NextAction::ResubmitAsDuplicate);
    CHECK(node.state == NodeState::Ready);
}

TEST_CASE("a persistent cause trips the retry-loop flag") {
    // Full-disk failures keep coming back; with the unbounded misconfiguration
    // the node would loop forever, so the repeated identical cause must be
    // surfaced rather than hidden by the auto-restart.
    RetryPolicy policy;
    policy.max_attempts = 5;
    policy.loop_threshold = 3;
    NodeRunState node;
    for (int attempt = 1; attempt <= 5; ++attempt) {
        node.state = NodeState::Running;
        node.attempts = attempt;
        handle_outcome(node, {OutcomeKind::Failure, std::string(cause::kDiskFull)}, policy);
    }
    CHECK(node.state == NodeState::Abandoned);
    CHECK(node.retry_loop_flagged);
    CHECK(node.same_cause_streak == 5);
    CHECK(policy.classify(cause::kDiskFull) == FailureClass::Permanent);
}

TEST_CASE("unbounded retries never abandon") {
    RetryPolicy policy;
    policy.unbounded = true;
    policy.max_attempts = 2;
    NodeRunState node;
    for (int attempt = 1; attempt <= 40; ++attempt) {
        node.state = NodeState::Running;
        node.attempts = attempt;
        auto action =
            handle_outcome(node, {OutcomeKind::Failure, std::string(cause::kDiskFull)}, policy);
        CHECK(action == NextAction::Resubmit);
    }
    CHECK(node.retry_loop_flagged);
}

TEST_CASE("alternating causes do not count as a loop") {
    RetryPolicy policy;
    policy.loop_threshold = 3;
    policy.max_attempts = 10;
    NodeRunState node;
    const char* causes[] = {"DISK_FULL", "APP_ERROR", "DISK_FULL", "APP_ERROR"};
    for (int i = 0; i < 4; ++i) {
        node.state = NodeState::Running;
        node.attempts = i + 1;
        handle_outcome(node, {OutcomeKind::Failure, causes[i]}, policy);
    }
    CHECK_FALSE(node.retry_loop_flagged);
}

TEST_CASE("outcome on a terminal node is a double-completion error") {
    RetryPolicy policy;
    NodeRunState node;
    node.state = NodeState::Completed;
    CHECK_THROWS_AS(handle_outcome(node, {OutcomeKind::Success, ""}, policy), std::logic_error);
    node.state = NodeState::Abandoned;
    CHECK_THROWS_AS(handle_outcome(node, {OutcomeKind::Failure, "X"}, policy), std::logic_error);
}

TEST_CASE("failure classification") {
    RetryPolicy policy;
    CHECK(policy.classify(cause::kTransferFail) == FailureClass::Transient);
    CHECK(policy.classify(cause::kLostContact) == FailureClass::Transient);
    CHECK(policy.classify(cause::kDiskFull) == FailureClass::Permanent);
    CHECK(policy.classify(cause::kAppError) == FailureClass::Unknown);
}
