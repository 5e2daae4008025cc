#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mcal/data_model.hpp"
#include "mcal/rng.hpp"
#include "test_util.hpp"

using namespace mcal;

TEST_CASE("validate_dataset accepts a minimal well-formed input") {
    auto r = validate_dataset({0.3}, {1}, {{1}}, {"ALL"});
    REQUIRE(r.ok());
    CHECK(r.dataset->size() == 1);
    CHECK(r.dataset->groups().index_of("ALL").has_value());
}

TEST_CASE("validate_dataset flags out-of-range scores with the row index") {
    auto r = validate_dataset({1.2}, {1}, {}, {});
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations[0].kind == ViolationKind::ScoreOutOfRange);
    CHECK(r.violations[0].index == 0);
}

TEST_CASE("validate_dataset flags length mismatches") {
    auto r = validate_dataset({0.3, 0.4}, {1}, {}, {});
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations[0].kind == ViolationKind::LengthMismatch);
}

TEST_CASE("validate_dataset collects several violations at once") {
    auto r = validate_dataset({1.5, 0.2}, {1, 7}, {}, {});
    REQUIRE(r.violations.size() == 2);
    CHECK(r.violations[0].kind == ViolationKind::ScoreOutOfRange);
    CHECK(r.violations[1].kind == ViolationKind::NonBinaryLabel);
}

TEST_CASE("validate_dataset rejects duplicate group names") {
    auto r = validate_dataset({0.5, 0.5}, {0, 1}, {{1, 0}, {0, 1}}, {"a", "a"});
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations[0].kind == ViolationKind::DuplicateGroupName);
}

TEST_CASE("GroupMatrix always carries an all-true ALL column") {
    auto g = GroupMatrix::with_all_column(3, {{1, 0, 1}}, {"math"});
    CHECK(g.group_count() == 2);
    CHECK(g.name(0) == "ALL");
    CHECK(g.count(0) == 3);
    CHECK_THROWS_AS(GroupMatrix(2, {{1, 0}}, {"noall"}), DataError);
    CHECK_THROWS_AS(GroupMatrix::with_all_column(2, {{1, 1}}, {"ALL"}), DataError);
}

TEST_CASE("split produces the documented sizes and is deterministic") {
    Rng rng(99);
    auto data = testutil::random_grid_dataset(rng, 10, 5, 1);
    auto [a1, b1] = split(data, 0.8, 7);
    CHECK(a1.size() == 8);
    CHECK(b1.size() == 2);
    auto [a2, b2] = split(data, 0.8, 7);
    CHECK(std::equal(a1.scores().begin(), a1.scores().end(), a2.scores().begin()));
    CHECK(std::equal(b1.labels().begin(), b1.labels().end(), b2.labels().begin()));
}

TEST_CASE("split refuses degenerate partitions") {
    auto one = validate_dataset({0.5}, {1}, {}, {});
    CHECK_THROWS_AS(split(*one.dataset, 0.5, 1), DataError);
}

TEST_CASE("split rows are disjoint and cover the dataset, groups preserved") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(200);
        auto data = testutil::random_grid_dataset(rng, n, 10, 2);
        const double fraction = 0.1 + 0.8 * rng.uniform01();
        const auto k = static_cast<std::size_t>(std::llround(n * fraction));
        if (k == 0 || k >= n) continue;
        auto [a, b] = split(data, fraction, rng.next_u64());
        CHECK(a.size() + b.size() == n);
        CHECK(a.groups().names() == data.groups().names());
        // multiset of (score,label) pairs must be preserved
        std::multiset<std::pair<double, int>> before, after;
        for (std::size_t i = 0; i < n; ++i) before.insert({data.scores()[i], data.labels()[i]});
        for (std::size_t i = 0; i < a.size(); ++i) after.insert({a.scores()[i], a.labels()[i]});
        for (std::size_t i = 0; i < b.size(); ++i) after.insert({b.scores()[i], b.labels()[i]});
        CHECK(before == after);
    }
}

TEST_CASE("Grid rounds to the nearest level with ties toward the lower point") {
    Grid g(10);
    CHECK(g.round(0.24) == 0.2);
    CHECK(g.round(0.25) == 0.2);  // tie -> lower
    CHECK(g.round(0.26) == doctest::Approx(0.3));
    CHECK(g.round(0.0) == 0.0);
    CHECK(g.round(1.0) == 1.0);
}

TEST_CASE("Grid::for_alpha computes m = ceil(1/alpha)") {
    CHECK(Grid::for_alpha(0.1).m() == 10);
    CHECK(Grid::for_alpha(0.05).m() == 20);
    CHECK(Grid::for_alpha(1.0 / 3.0).m() == 3);
    CHECK(Grid::for_alpha(0.3).m() == 4);
}

TEST_CASE("rounding is within half a cell and idempotent") {
    Rng rng(17);
    for (int trial = 0; trial < 5000; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform_index(40));
        Grid g(m);
        const double s = rng.uniform01();
        const double r = g.round(s);
        CHECK(std::abs(s - r) <= 0.5 / m + 1e-15);
        CHECK(g.round(r) == r);
        CHECK(g.index_of(r).has_value());
    }
}

TEST_CASE("CalibratedModel enforces patches-xor-coefficients") {
    CalibratedModel m;
    m.m = 10;
    m.method = Method::LS;
    CHECK_THROWS_AS(m.validate(), DataError);  // parametric without coefficients
    m.coefficients = {0.0, 1.0};
    CHECK_NOTHROW(m.validate());
    m.patches.push_back({BinDescriptor{0.5, Comparator::EQ, 0}, ConstantShift{0.1}});
    CHECK_THROWS_AS(m.validate(), DataError);
}
