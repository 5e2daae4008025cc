#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcal/metrics.hpp"
#include "mcal/synthetic.hpp"
#include "test_util.hpp"

using namespace mcal;
using namespace mcal::synth;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.groups = {{"a", 0.5}, {"b", 0.3}};
    spec.true_prob.kind = TrueProbKind::Logistic;
    spec.true_prob.base_logit = -0.3;
    spec.true_prob.weights = {0.8, -1.1};
    spec.miscal.kind = MiscalKind::LogitShift;
    spec.miscal.deltas = {0.7, -0.5};
    spec.n = 1000;
    spec.seed = 5;
    return spec;
}

}  // namespace

TEST_CASE("generation is reproducible for a fixed spec and seed") {
    auto spec = small_spec();
    auto d1 = generate(spec);
    auto d2 = generate(spec);
    CHECK(std::equal(d1.dataset.scores().begin(), d1.dataset.scores().end(),
                     d2.dataset.scores().begin()));
    CHECK(std::equal(d1.dataset.labels().begin(), d1.dataset.labels().end(),
                     d2.dataset.labels().begin()));
    for (std::size_t k = 0; k < d1.dataset.groups().group_count(); ++k)
        for (std::size_t i = 0; i < d1.dataset.size(); ++i)
            CHECK(d1.dataset.groups().member(i, k) == d2.dataset.groups().member(i, k));

    spec.seed = 6;
    auto d3 = generate(spec);
    CHECK_FALSE(std::equal(d1.dataset.scores().begin(), d1.dataset.scores().end(),
                           d3.dataset.scores().begin()));
}

TEST_CASE("n = 0 is rejected") {
    auto spec = small_spec();
    spec.n = 0;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("a table must cover every reachable signature") {
    SyntheticSpec spec;
    spec.groups = {{"a", 0.5}};
    spec.true_prob.kind = TrueProbKind::Table;
    spec.true_prob.table = {{0, 0.4}};  // mask 1 missing
    spec.n = 10;
    CHECK_THROWS_AS(generate(spec), DataError);
}

TEST_CASE("identity miscalibration has zero population asce") {
    auto spec = small_spec();
    spec.miscal = {};
    auto pop = population_metrics(spec);
    CHECK(pop.asce <= 1e-15);
    for (const auto& [name, g] : pop.gasce) CHECK(g <= 1e-15);
}

TEST_CASE("two-line population arithmetic: constant score 0.5, p* = 0.7") {
    SyntheticSpec spec;
    spec.groups = {{"only", 1.0}};
    spec.true_prob.kind = TrueProbKind::Table;
    spec.true_prob.table = {{1, 0.7}};
    spec.miscal.kind = MiscalKind::LogitScale;
    spec.miscal.gamma = 0.0;  // expit(0) = 0.5 everywhere
    spec.n = 1;
    auto pop = population_metrics(spec);
    CHECK(pop.mse == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pop.asce == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("population metrics reject the noise transform") {
    auto spec = small_spec();
    spec.miscal = {};
    spec.miscal.kind = MiscalKind::Noise;
    spec.miscal.sigma = 0.05;
    CHECK_THROWS_AS(population_metrics(spec), ConfigError);
    CHECK_NOTHROW(generate(spec));  // generation itself is fine
}

TEST_CASE("population metrics match a large Monte-Carlo estimate") {
    auto spec = small_spec();
    spec.n = 1000000;
    spec.seed = 99;
    auto pop = population_metrics(spec);
    auto gen = generate(spec);

    const double emp_mse = testutil::oracle_mse(gen.dataset.scores(), gen.dataset.labels());
    // (Y - s)^2 is bounded by 1, so its standard error is at most 0.5/sqrt(n).
    CHECK(std::abs(emp_mse - pop.mse) <= 3.0 * 0.5 / std::sqrt(1e6));

    const double emp_asce =
        testutil::oracle_asce_exact(gen.dataset.scores(), gen.dataset.labels());
    // Level-set biases carry a small upward finite-sample inflation of order
    // (#levels)/n on top of sampling noise.
    CHECK(std::abs(emp_asce - pop.asce) <= 3.0 * 0.5 / std::sqrt(1e6) + 16.0 / 1e6);
}

TEST_CASE("identity miscalibration is empirically calibrated within sampling noise") {
    auto spec = small_spec();
    spec.miscal = {};
    spec.n = 100000;
    spec.seed = 77;
    auto gen = generate(spec);
    const double emp = testutil::oracle_asce_exact(gen.dataset.scores(), gen.dataset.labels());
    CHECK(emp < 3.0 / std::sqrt(1e5));
}

TEST_CASE("per-group logit-shift bias matches the closed form from the table") {
    auto spec = small_spec();
    spec.n = 200000;
    spec.seed = 123;
    auto gen = generate(spec);
    const auto sigs = enumerate_signatures(spec);

    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        double w_total = 0.0, want = 0.0;
        for (const auto& sig : sigs) {
            if (!(sig.mask >> g & 1)) continue;
            w_total += sig.weight;
            want += sig.weight * (sig.p_true - sig.score);
        }
        want /= w_total;
        const auto col = gen.dataset.groups().column(g + 1);  // +1 skips ALL
        std::vector<std::uint8_t> mask(col.begin(), col.end());
        const double got =
            testutil::oracle_bias(gen.dataset.scores(), gen.dataset.labels(), mask);
        const double n_g = static_cast<double>(gen.dataset.groups().count(g + 1));
        CHECK(std::abs(got - want) <= 3.0 / std::sqrt(n_g));
    }
}

TEST_CASE("empirical metrics approach population values at the 1/sqrt(n) rate") {
    auto spec = small_spec();
    auto pop = population_metrics(spec);
    for (std::size_t n : {std::size_t{1000}, std::size_t{10000}, std::size_t{100000}}) {
        spec.n = n;
        spec.seed = 1234;
        auto gen = generate(spec);
        const double emp = testutil::oracle_mse(gen.dataset.scores(), gen.dataset.labels());
        CHECK(std::abs(emp - pop.mse) <= 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("partition group model produces one-hot memberships") {
    SyntheticSpec spec;
    spec.group_model = GroupModel::Partition;
    spec.groups = {{"p0", 0.25}, {"p1", 0.5}, {"p2", 0.25}};
    spec.true_prob.kind = TrueProbKind::Logistic;
    spec.true_prob.base_logit = 0.0;
    spec.true_prob.weights = {0.5, -0.5, 1.0};
    spec.n = 500;
    spec.seed = 2;
    auto gen = generate(spec);
    for (std::size_t i = 0; i < gen.dataset.size(); ++i) {
        std::size_t members = 0;
        for (std::size_t k = 1; k < gen.dataset.groups().group_count(); ++k)
            members += gen.dataset.groups().member(i, k) ? 1 : 0;
        CHECK(members == 1);
    }
    const auto sigs = enumerate_signatures(spec);
    CHECK(sigs.size() == 3);
}
