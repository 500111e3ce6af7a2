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

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace igt {

enum class CertificateAuthority { Globus, DOESG };

inline const char* to_string(CertificateAuthority ca) {
    return ca == CertificateAuthority::Globus ? "Globus" : "DOESG";
}

struct GridUser {
    std::string dn;
    CertificateAuthority ca = CertificateAuthority::DOESG;
    std::set<std::string> groups;
};

/// Central user registry: groups with an associated local account name and an
/// ordered member list. Mutations are serialized by the owner; sites consume
/// immutable gridmap snapshots derived from it.
class UserDirectory {
public:
    struct Group {
        std::string local_account;
        std::vector<std::string> members; // DNs in insertion order
    };

    void create_group(const std::string& group, const std::string& local_account) {
        if (groups_.count(group)) throw std::invalid_argument("group already exists: " + group);
        groups_[group] = Group{local_account, {}};
    }

    /// Adds a user to a group; re-adding the same DN is a no-op.
    void add_user(const GridUser& user, const std::string& group) {
        auto it = groups_.find(group);
        if (it == groups_.end()) throw std::invalid_argument("no such group: " + group);
        if (user.dn.empty()) throw std::invalid_argument("user DN must be non-empty");
        auto& members = it->second.members;
        if (std::find(members.begin(), members.end(), user.dn) == members.end())
            members.push_back(user.dn);
        users_[user.dn] = user.ca;
    }

    bool has_group(const std::string& group) const { return groups_.count(group) != 0; }

    std::size_t member_count(const std::string& group) const {
        auto it = groups_.find(group);
        if (it == groups_.end()) throw std::invalid_argument("no such group: " + group);
        return it->second.members.size();
    }

    const std::map<std::string, Group>& groups() const { return groups_; }

private:
    std::map<std::string, Group> groups_;
    std::map<std::string, CertificateAuthority> users_;
};

/// Renders the gridmap file: one `"<DN>" <account>` line per (user, group)
/// membership, sorted by DN then account, duplicates collapsed. The output is
/// a pure function of directory content, byte-identical across insertions
/// orders and repeated calls.
inline std::string mkgridmap(const UserDirectory& dir) {
    std::set<std::pair<std::string, std::string>> entries;
    for (const auto& [group, g] : dir.groups()) {
        (void)group;
        for (const auto& dn : g.members) entries.insert({dn, g.local_account});
    }
    std::string out;
    for (const auto& [dn, account] : entries) out += "\"" + dn + "\" " + account + "\n";
    return out;
}

/// A site's view of the gridmap at one sync point. Sites refresh periodically,
/// so the snapshot may lag the central directory.
class GridmapSnapshot {
public:
    GridmapSnapshot() = default;

    static GridmapSnapshot from_directory(const UserDirectory& dir) {
        return from_content(mkgridmap(dir));
    }

    static GridmapSnapshot from_content(std::string content) {
        GridmapSnapshot snap;
        snap.content_ = std::move(content);
        std::size_t pos = 0;
        while (pos < snap.content_.size()) {
            std::size_t eol = snap.content_.find('\n', pos);
            if (eol == std::string::npos) eol = snap.content_.size();
            std::string_view line(snap.content_.data() + pos, eol - pos);
            pos = eol + 1;
            if (line.size() < 4 || line.front() != '"') continue;
            std::size_t close = line.find('"', 1);
            if (close == std::string_view::npos || close + 2 > line.size()) continue;
            std::string dn(line.substr(1, close - 1));
            std::string account(line.substr(close + 2));
            // First matching entry wins; lines are sorted, so this is the
            // lexicographically smallest account for the DN.
            snap.first_mapping_.emplace(std::move(dn), std::move(account));
        }
        return snap;
    }

    const std::string& content() const { return content_; }

    /// Maps a DN to its local account, or nothing if the DN is absent. A
    /// denial is a domain outcome, retryable after the next sync.
    std::optional<std::string> authorize(std::string_view dn) const {
        auto it = first_mapping_.find(std::string(dn));
        if (it == first_mapping_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::string content_;
    std::map<std::string, std::string> first_mapping_;
};

inline std::optional<std::string> authorize(const GridmapSnapshot& gridmap, std::string_view dn) {
    return gridmap.authorize(dn);
}

} // namespace igt
