#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "hfltn/scheduler.hpp"

using namespace hfltn;
using namespace hfltn::scheduler;

namespace {
std::vector<ClientId> iota_roster(std::size_t n) {
    std::vector<ClientId> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<ClientId>(i);
    return r;
}
}  // namespace

TEST_CASE("rotate: disjoint windows that wrap") {
    const auto roster = iota_roster(5);
    CHECK(rotate(roster, 0, 2) == std::vector<ClientId>{0, 1});
    CHECK(rotate(roster, 1, 2) == std::vector<ClientId>{2, 3});
    CHECK(rotate(roster, 2, 2) == std::vector<ClientId>{4, 0});
}

TEST_CASE("rotate: cap at or above roster size activates everyone") {
    const auto roster = iota_roster(4);
    for (Round t = 0; t < 5; ++t) {
        auto active = rotate(roster, t, 9);
        std::sort(active.begin(), active.end());
        CHECK(active == roster);
    }
}

TEST_CASE("rotate rejects an empty roster") {
    CHECK_THROWS_AS(rotate({}, 0, 3), EmptyRoster);
}

TEST_CASE("cumulative coverage: N=500 C=150 reaches 0.9 then 1.0") {
    RoundScheduler s(iota_roster(500), 150, true, true);
    std::vector<double> cumulative;
    for (int t = 0; t < 5; ++t) {
        const auto sched = s.advance();
        CHECK(sched.per_epoch_ratio() == doctest::Approx(0.3).epsilon(1e-12));
        cumulative.push_back(sched.cumulative_ratio());
    }
    CHECK(cumulative[2] == 0.9);  // 450 of 500 after three rounds
    CHECK(cumulative[3] == 1.0);  // full coverage one round later
    CHECK(cumulative[4] == 1.0);
}

TEST_CASE("no-CRM control: history frozen after round 0") {
    RoundScheduler s(iota_roster(500), 150, true, false);
    for (int t = 0; t < 6; ++t) {
        const auto sched = s.advance();
        CHECK(sched.cumulative_ratio() == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(sched.active == rotate(s.roster(), 0, 150));
    }
}

TEST_CASE("consecutive rounds are disjoint before the ring wraps") {
    const auto roster = iota_roster(100);
    const std::uint32_t cap = 30;
    for (Round t = 0; (t + 1) * cap <= roster.size(); ++t) {
        const auto a = rotate(roster, t, cap);
        const auto b = rotate(roster, t + 1, cap);
        const std::set<ClientId> sa(a.begin(), a.end());
        for (ClientId id : b) CHECK(sa.count(id) == 0);
    }
}

TEST_CASE("full-cycle coverage within ceil(N/C) rounds") {
    // exactly once when C divides N
    {
        std::set<ClientId> seen;
        std::size_t total = 0;
        for (Round t = 0; t < 4; ++t) {
            const auto a = rotate(iota_roster(100), t, 25);
            seen.insert(a.begin(), a.end());
            total += a.size();
        }
        CHECK(seen.size() == 100);
        CHECK(total == 100);  // no repeats: a permutation of the roster
    }
    // at least once otherwise
    {
        std::set<ClientId> seen;
        for (Round t = 0; t < 4; ++t) {  // ceil(500/150) = 4
            const auto a = rotate(iota_roster(500), t, 150);
            seen.insert(a.begin(), a.end());
        }
        CHECK(seen.size() == 500);
    }
}

TEST_CASE("diversity ratios") {
    CHECK(per_epoch_diversity(150, 500) == 0.3);
    CHECK(per_epoch_diversity(4, 4) == 1.0);
    CHECK(per_epoch_diversity(1, 4) == 0.25);
    CHECK(cumulative_diversity(450, 500) == 0.9);
    CHECK(cumulative_diversity(500, 500) == 1.0);
}

TEST_CASE("flops accounting: paper figures") {
    CHECK(flops_for_round(500, 499200) == 249600000ULL);
    CHECK(flops_for_round(150, 499200) == 74880000ULL);
    CHECK(flops_for_round(1000, 499200) == 499200000ULL);
    CHECK(flops_for_round(0, 499200) == 0ULL);
}

TEST_CASE("capped cost is independent of N once N >= C") {
    const std::uint64_t per_client = 499200;
    const auto at_150 = flops_for_round(150, per_client);
    for (std::size_t n : {150, 300, 500, 750, 1000}) {
        RoundScheduler s(iota_roster(n), 150, true, true);
        const auto sched = s.advance();
        CHECK(flops_for_round(sched.active.size(), per_client) == at_150);
    }
}

TEST_CASE("dccm disabled: every client active every round") {
    RoundScheduler s(iota_roster(40), 10, false, true);
    for (int t = 0; t < 3; ++t) {
        CHECK(s.advance().active.size() == 40);
    }
}
