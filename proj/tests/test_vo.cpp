#include <doctest.h>

#include <algorithm>

#include "igt/rng.hpp"
#include "igt/vo.hpp"

using namespace igt;

TEST_CASE("group creation and idempotent user addition") {
    UserDirectory dir;
    dir.create_group("uscms", "uscms01");
    CHECK_THROWS_AS(dir.create_group("uscms", "uscms02"), std::invalid_argument);

    GridUser jane{"/DC=org/DC=doegrids/OU=People/CN=Jane Doe", CertificateAuthority::DOESG, {}};
    dir.add_user(jane, "uscms");
    CHECK(dir.member_count("uscms") == 1);
    dir.add_user(jane, "uscms"); // re-add is a no-op
    CHECK(dir.member_count("uscms") == 1);

    CHECK_THROWS_AS(dir.add_user(jane, "atlas"), std::invalid_argument);
}

TEST_CASE("mkgridmap renders quoted DN lines") {
    UserDirectory dir;
    dir.create_group("uscms", "uscms01");
    dir.add_user({"/DC=org/DC=doegrids/OU=People/CN=Jane Doe", CertificateAuthority::DOESG, {}},
                 "uscms");
    CHECK(mkgridmap(dir) == "\"/DC=org/DC=doegrids/OU=People/CN=Jane Doe\" uscms01\n");

    UserDirectory empty;
    CHECK(mkgridmap(empty).empty());

    CHECK(mkgridmap(dir) == mkgridmap(dir)); // byte determinism
}

TEST_CASE("mkgridmap is independent of insertion order") {
    std::vector<std::string> dns = {
        "/DC=org/DC=doegrids/OU=People/CN=Alice A",
        "/DC=org/DC=doegrids/OU=People/CN=Bob B",
        "/O=Grid/O=Globus/OU=example.edu/CN=Carol C",
        "/O=Grid/O=Globus/OU=example.edu/CN=Dan D",
    };
    RngStream gen(7, "vo-shuffle");
    std::string reference;
    for (int trial = 0; trial < 20; ++trial) {
        // Fisher-Yates with our own stream, deterministic across runs.
        std::vector<std::string> order = dns;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[gen.below(i)]);
        UserDirectory dir;
        dir.create_group("uscms", "uscms01");
        dir.create_group("testers", "tst01");
        for (const auto& dn : order) {
            dir.add_user({dn, CertificateAuthority::Globus, {}}, "uscms");
            if (dn.find("Globus") != std::string::npos)
                dir.add_user({dn, CertificateAuthority::Globus, {}}, "testers");
        }
        std::string content = mkgridmap(dir);
        if (trial == 0)
            reference = content;
        else
            CHECK(content == reference);
    }
    // Lines sorted by DN then account.
    auto lines_sorted = [](const std::string& s) {
        std::vector<std::string> lines;
        std::size_t pos = 0;
        while (pos < s.size()) {
            auto eol = s.find('\n', pos);
            lines.push_back(s.substr(pos, eol - pos));
            pos = eol + 1;
        }
        return std::is_sorted(lines.begin(), lines.end());
    };
    CHECK(lines_sorted(reference));
}

TEST_CASE("authorize maps known DNs and denies unknown ones") {
    UserDirectory dir;
    dir.create_group("uscms", "uscms01");
    dir.add_user({"/CN=Known User", CertificateAuthority::Globus, {}}, "uscms");
    auto snap = GridmapSnapshot::from_directory(dir);

    auto account = snap.authorize("/CN=Known User");
    REQUIRE(account.has_value());
    CHECK(*account == "uscms01");

    CHECK_FALSE(snap.authorize("/CN=Stranger").has_value());
}

TEST_CASE("multi-group users map to the lexicographically first account") {
    UserDirectory dir;
    dir.create_group("uscms", "uscms01");
    dir.create_group("admins", "adm01");
    dir.add_user({"/CN=Two Hats", CertificateAuthority::DOESG, {}}, "uscms");
    dir.add_user({"/CN=Two Hats", CertificateAuthority::DOESG, {}}, "admins");
    auto snap = GridmapSnapshot::from_directory(dir);
    CHECK(*snap.authorize("/CN=Two Hats") == "adm01");
    // Both membership lines present in the file.
    CHECK(snap.content().find("\"/CN=Two Hats\" adm01\n") != std::string::npos);
    CHECK(snap.content().find("\"/CN=Two Hats\" uscms01\n") != std::string::npos);
}

TEST_CASE("a stale snapshot denies until the next sync") {
    UserDirectory dir;
    dir.create_group("uscms", "uscms01");
    auto site_snapshot = GridmapSnapshot::from_directory(dir); // site synced now

    // Central add lands after the site's snapshot: denial until re-sync.
    dir.add_user({"/CN=New Member", CertificateAuthority::DOESG, {}}, "uscms");
    CHECK_FALSE(site_snapshot.authorize("/CN=New Member").has_value());

    site_snapshot = GridmapSnapshot::from_directory(dir); // next sync
    CHECK(site_snapshot.authorize("/CN=New Member").has_value());
}
