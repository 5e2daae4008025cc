#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcal/rng.hpp"
#include "mcal/scoring.hpp"
#include "test_util.hpp"

using namespace mcal;

TEST_CASE("true_false_score basics") {
    CHECK(true_false_score(0.0, 0.0) == 0.5);
    CHECK(true_false_score(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("true_false_score survives extreme logits without overflow") {
    const double s = true_false_score(1000.0, 0.0);
    CHECK(s > 0.999);
    CHECK(s <= 1.0);
    const double oracle =
        static_cast<double>(testutil::oracle_softmax_max(std::vector<double>{1000.0, 0.0}));
    CHECK(s == doctest::Approx(oracle).epsilon(1e-12));
    CHECK_THROWS_AS(true_false_score(std::nan(""), 0.0), DataError);
}

TEST_CASE("inverse perplexity score") {
    SequenceLogProbs seq;
    seq.logprobs = {-1.0, -1.0, std::log(0.5), std::log(0.5), std::log(0.5), std::log(0.5)};
    seq.prompt_len = 2;
    CHECK(inverse_perplexity_score(seq) == doctest::Approx(0.5).epsilon(1e-12));

    SequenceLogProbs two;
    two.logprobs = {std::log(0.9), std::log(0.4)};
    two.prompt_len = 0;
    CHECK(inverse_perplexity_score(two) == doctest::Approx(0.6).epsilon(1e-12));

    SequenceLogProbs certain;
    certain.logprobs = {0.0, 0.0, 0.0};
    certain.prompt_len = 1;
    CHECK(inverse_perplexity_score(certain) == 1.0);

    SequenceLogProbs empty;
    empty.logprobs = {-1.0};
    empty.prompt_len = 1;
    CHECK_THROWS_AS(inverse_perplexity_score(empty), DataError);
}

TEST_CASE("multiple choice score") {
    CHECK(multiple_choice_score(std::vector<double>{0, 0, 0, 0}) == 0.25);
    CHECK(multiple_choice_score(std::vector<double>{std::log(6.0), std::log(2.0), 0.0, 0.0}) ==
          doctest::Approx(0.6).epsilon(1e-12));
    CHECK_THROWS_AS(multiple_choice_score(std::vector<double>{1.0}), DataError);
    CHECK_THROWS_AS(multiple_choice_score(std::vector<double>{1.0, std::nan("")}), DataError);
}

TEST_CASE("multiple choice score matches the extended-precision softmax oracle") {
    Rng rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> logits(10);
        for (auto& v : logits) v = (rng.uniform01() - 0.5) * 20.0;
        const double got = multiple_choice_score(logits);
        const double want = static_cast<double>(testutil::oracle_softmax_max(logits));
        CHECK(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("scores are invariant under logit shifts") {
    Rng rng(42);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = (rng.uniform01() - 0.5) * 30.0;
        const double b = (rng.uniform01() - 0.5) * 30.0;
        const double c = (rng.uniform01() - 0.5) * 100.0;
        CHECK(std::abs(true_false_score(a + c, b + c) - true_false_score(a, b)) <= 1e-12);

        std::vector<double> logits(2 + rng.uniform_index(8));
        for (auto& v : logits) v = (rng.uniform01() - 0.5) * 30.0;
        std::vector<double> shifted = logits;
        for (auto& v : shifted) v += c;
        CHECK(std::abs(multiple_choice_score(shifted) - multiple_choice_score(logits)) <= 1e-12);
    }
}

TEST_CASE("complement symmetry and the 1/K floor") {
    Rng rng(43);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = (rng.uniform01() - 0.5) * 40.0;
        const double b = (rng.uniform01() - 0.5) * 40.0;
        CHECK(std::abs(true_false_score(a, b) + true_false_score(b, a) - 1.0) <= 1e-15);

        const std::size_t k = 2 + rng.uniform_index(10);
        std::vector<double> logits(k);
        for (auto& v : logits) v = (rng.uniform01() - 0.5) * 40.0;
        CHECK(multiple_choice_score(logits) >= 1.0 / static_cast<double>(k));
    }
}

TEST_CASE("TokenLogits lookups") {
    TokenLogits logits({1.5, -0.5}, {{"True", 0}, {"False", 1}});
    CHECK(logits.logit_for("True") == 1.5);
    CHECK_THROWS_AS(logits.logit_for("Maybe"), DataError);
}
