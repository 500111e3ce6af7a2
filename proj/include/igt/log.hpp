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

#include <cstdio>
#include <string>

#include "igt/executor.hpp"

namespace igt {

/// Structured form of one event-log line, retained in memory when the engine
/// runs with keep_records (tests and small campaigns).
struct LogRecord {
    enum class Type {
        Submit,
        Node,      // state transition of a DAG node
        Transfer,  // one transfer attempt outcome
        Saturation,
        RetryLoop,
        Duplicate,
        Outage,
        SiteChange,
        AuthDenied,
        Sync,
        Truncated,
    };

    Type type = Type::Node;
    double t = 0.0;
    int master = -1;
    int job = -1;
    int node = -1; // node index within the job's chain
    int site = -1;
    NodeState from = NodeState::Idle;
    NodeState to = NodeState::Idle;
    int attempt = 0;
    std::string cause;
    std::string dn;
    std::string account;
    double value = 0.0; // type-specific (wasted seconds, deferred count, ...)
};

namespace logfmt {

inline void append_time(std::string& line, double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "T=%.6f", t);
    line += buf;
}

inline void append_num(std::string& line, const char* key, double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s=%.*f", key, decimals, v);
    line += buf;
}

inline void append_int(std::string& line, const char* key, long long v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " %s=%lld", key, v);
    line += buf;
}

inline void append_str(std::string& line, const char* key, const std::string& v) {
    line += ' ';
    line += key;
    line += '=';
    line += v;
}

inline void append_quoted(std::string& line, const char* key, const std::string& v) {
    line += ' ';
    line += key;
    line += "=\"";
    line += v;
    line += '"';
}

} // namespace logfmt

} // namespace igt
