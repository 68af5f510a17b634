#include "covlaw/errors.hpp"
#include "covlaw/partitions.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace covlaw;

namespace {

// Direct definition: blocks {a,b}, {c,d} cross iff a < c < b < d.
bool crosses_brute(const PairPartition& pi) {
    for (auto [a, b] : pi.blocks())
        for (auto [c, d] : pi.blocks())
            if (a < c && c < b && b < d) return true;
    return false;
}

}  // namespace

TEST_CASE("pair partition counts") {
    CHECK(enumerate_pair_partitions(0).size() == 1);
    CHECK_THROWS_AS(enumerate_pair_partitions(3), DomainError);
    CHECK_THROWS_AS(enumerate_noncrossing(5), DomainError);
    for (int k = 1; k <= 6; ++k) {
        CHECK(static_cast<long long>(enumerate_pair_partitions(2 * k).size()) == double_factorial_odd(2 * k));
        CHECK(static_cast<long long>(enumerate_noncrossing(2 * k).size()) == catalan(k));
        CHECK(crossing_count(2 * k) == double_factorial_odd(2 * k) - catalan(k));
    }
    CHECK(catalan(12) == 208012);
    CHECK(double_factorial_odd(12) == 10395);
}

TEST_CASE("enumerations are distinct and valid") {
    for (int l = 2; l <= 8; l += 2) {
        const auto all = enumerate_pair_partitions(l);
        std::set<PairPartition> uniq(all.begin(), all.end());
        CHECK(uniq.size() == all.size());
        for (const auto& pi : all) {
            CHECK(pi.length() == l);
            CHECK(is_noncrossing(pi) == !crosses_brute(pi));
        }
        for (const auto& pi : enumerate_noncrossing(l)) CHECK_FALSE(crosses_brute(pi));
    }
}

TEST_CASE("construction validates matchings") {
    CHECK_THROWS_AS(PairPartition({{1, 1}}), DomainError);
    CHECK_THROWS_AS(PairPartition({{1, 2}, {2, 3}}), DomainError);
    CHECK_THROWS_AS(PairPartition({{1, 3}}), DomainError);
    const PairPartition a({{3, 4}, {2, 1}});
    CHECK(a.blocks() == std::vector<PairPartition::Block>{{1, 2}, {3, 4}});
}

TEST_CASE("partners, concat, nesting and reflection") {
    const PairPartition pi({{1, 4}, {2, 3}});
    CHECK(pi.partners() == std::vector<int>{3, 2, 1, 0});
    CHECK(pi.nesting_depth() == 2);
    CHECK(PairPartition({{1, 2}, {3, 4}}).nesting_depth() == 1);
    CHECK(PairPartition().nesting_depth() == 0);

    const PairPartition c = pi.concat(PairPartition({{1, 2}}));
    CHECK(c == PairPartition({{1, 4}, {2, 3}, {5, 6}}));

    const PairPartition outer = PairPartition({{1, 2}}).nested_in_outer();
    CHECK(outer == PairPartition({{1, 4}, {2, 3}}));
    CHECK(PairPartition().nested_in_outer() == PairPartition({{1, 2}}));

    const PairPartition q({{1, 2}, {3, 6}, {4, 5}});
    CHECK(q.reflected() == PairPartition({{1, 4}, {2, 3}, {5, 6}}));
    CHECK(q.reflected().reflected() == q);
}

TEST_CASE("adjacent block removal") {
    const PairPartition q({{1, 2}, {3, 6}, {4, 5}});
    CHECK(find_innermost_adjacent(q) == PairPartition::Block{1, 2});
    CHECK(q.without_adjacent(4) == PairPartition({{1, 2}, {3, 4}}));
    CHECK(q.without_adjacent(1) == PairPartition({{1, 4}, {2, 3}}));
    CHECK_THROWS(q.without_adjacent(3));
    // Every non-crossing pairing reduces to the empty one.
    for (const auto& pi : enumerate_noncrossing(10)) {
        PairPartition cur = pi;
        while (!cur.empty()) cur = cur.without_adjacent(find_innermost_adjacent(cur).first);
        CHECK(cur.empty());
    }
}

TEST_CASE("reflection preserves non-crossing") {
    for (const auto& pi : enumerate_pair_partitions(8)) CHECK(is_noncrossing(pi) == is_noncrossing(pi.reflected()));
}

TEST_CASE("printing") {
    CHECK(PairPartition({{1, 4}, {2, 3}}).to_string() == "{(1,4),(2,3)}");
}
