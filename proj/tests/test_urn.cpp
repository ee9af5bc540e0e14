#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "herdlab/rng.hpp"
#include "herdlab/urn.hpp"

using namespace herdlab;

namespace {

UrnState make_state(std::vector<std::uint64_t> counts) {
    UrnState s;
    s.counts = std::move(counts);
    return s;
}

} // namespace

TEST_CASE("share0 is the first color's count share") {
    CHECK(share0(make_state({1, 2})) == doctest::Approx(1.0 / 3.0));
    CHECK(share0(make_state({5})) == doctest::Approx(1.0));
    CHECK(share0(make_state({3, 3, 6})) == doctest::Approx(0.25));
}

TEST_CASE("linear rule picks by count share with lower index on the boundary") {
    UrnRule rule; // gamma = 1
    auto s = make_state({2, 1});
    CHECK(urn_step(s, rule, 0.0) == 0);
    CHECK(s.counts[0] == 3);
    CHECK(s.step == 1);

    s = make_state({2, 1}); // P(color 0) = 2/3
    CHECK(urn_step(s, rule, 2.0 / 3.0) == 0); // boundary hit stays with the lower index
    s = make_state({2, 1});
    CHECK(urn_step(s, rule, 0.67) == 1);
    CHECK(s.counts[1] == 2);
}

TEST_CASE("gamma 0 ignores the counts") {
    UrnRule rule;
    rule.gamma = 0.0;
    auto s = make_state({1000, 1});
    CHECK(urn_step(s, rule, 0.5) == 0); // equal weights, boundary at 1/2
    s = make_state({1000, 1});
    CHECK(urn_step(s, rule, 0.500001) == 1);
}

TEST_CASE("gamma 2 squares the counts") {
    UrnRule rule;
    rule.gamma = 2.0;
    auto s = make_state({2, 1}); // weights 4:1
    CHECK(urn_step(s, rule, 0.8) == 0);
    s = make_state({2, 1});
    CHECK(urn_step(s, rule, 0.81) == 1);
}

TEST_CASE("increment is applied to the winning color only") {
    UrnRule rule;
    rule.increment = 3;
    auto s = make_state({1, 1});
    urn_step(s, rule, 0.0);
    CHECK(s.counts[0] == 4);
    CHECK(s.counts[1] == 1);
}

TEST_CASE("urn_step validates its inputs") {
    UrnRule rule;
    auto s = make_state({1, 1});
    CHECK_THROWS_AS(urn_step(s, rule, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(urn_step(s, rule, -0.1), std::invalid_argument);
    auto empty = make_state({});
    CHECK_THROWS_AS(urn_step(empty, rule, 0.5), std::invalid_argument);
    auto zero = make_state({1, 0});
    CHECK_THROWS_AS(urn_step(zero, rule, 0.5), std::invalid_argument);
    UrnRule bad;
    bad.gamma = -0.5;
    CHECK_THROWS_AS(urn_step(s, bad, 0.5), std::invalid_argument);
    bad.gamma = 1.0;
    bad.increment = 0;
    CHECK_THROWS_AS(urn_step(s, bad, 0.5), std::invalid_argument);
}

TEST_CASE("run_urn records one share point per step") {
    UrnRule rule;
    const auto traj = run_urn(make_state({1, 1}), rule, 50, 7);
    CHECK(traj.initial_share == doctest::Approx(0.5));
    REQUIRE(traj.points.size() == 50);
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        CHECK(traj.points[i].step == i + 1);
        CHECK(traj.points[i].share >= 0.0);
        CHECK(traj.points[i].share <= 1.0);
    }
    // total grows by exactly one per step, so the share denominator is known
    const double last = traj.points.back().share;
    const double numer = last * (2.0 + 50.0);
    CHECK(numer == doctest::Approx(std::round(numer)).epsilon(1e-9));
}

TEST_CASE("one step from (1,1) lands on 1/3 or 2/3 and both occur") {
    UrnRule rule;
    std::set<long> seen;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto traj = run_urn(make_state({1, 1}), rule, 1, seed);
        const double s = traj.points[0].share;
        const bool low = std::abs(s - 1.0 / 3.0) < 1e-12;
        const bool high = std::abs(s - 2.0 / 3.0) < 1e-12;
        CHECK((low || high));
        seen.insert(low ? 1 : 2);
    }
    CHECK(seen.size() == 2);
}

TEST_CASE("run_urn is deterministic in the seed") {
    UrnRule rule;
    const auto a = run_urn(make_state({1, 1}), rule, 300, 99);
    const auto b = run_urn(make_state({1, 1}), rule, 300, 99);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].share == b.points[i].share);
    const auto c = run_urn(make_state({1, 1}), rule, 300, 100);
    bool same = true;
    for (std::size_t i = 0; i < a.points.size(); ++i)
        if (a.points[i].share != c.points[i].share) same = false;
    CHECK_FALSE(same);
}

TEST_CASE("ensemble is ordered by run index and thread-count invariant") {
    UrnRule rule;
    const auto seq = final_share_ensemble(make_state({1, 1}), rule, 100, 24, 5, 1);
    const auto par = final_share_ensemble(make_state({1, 1}), rule, 100, 24, 5, 3);
    REQUIRE(seq.size() == 24);
    REQUIRE(par.size() == 24);
    for (std::size_t r = 0; r < seq.size(); ++r) {
        CHECK(seq[r] == par[r]);
        const auto traj = run_urn(make_state({1, 1}), rule, 100, rng::derive_seed(5, r));
        CHECK(seq[r] == traj.points.back().share);
    }
}

TEST_CASE("run_urn validates steps") {
    UrnRule rule;
    CHECK_THROWS_AS(run_urn(make_state({1, 1}), rule, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(final_share_ensemble(make_state({1, 1}), rule, 0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(final_share_ensemble(make_state({1, 1}), rule, 10, 0, 1),
                    std::invalid_argument);
}
