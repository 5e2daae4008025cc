#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcal/error.hpp"

namespace mcal {

/// Unnormalized next-token logits with a token -> position lookup.
class TokenLogits {
public:
    TokenLogits(std::vector<double> values, std::unordered_map<std::string, std::size_t> index);

    double logit_for(const std::string& token) const;
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<double> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Per-token log-probabilities of a full sequence; the answer span is
/// positions prompt_len..total_len-1 (0-based).
struct SequenceLogProbs {
    std::vector<double> logprobs;  // size == total_len, each <= 0
    std::size_t prompt_len = 0;

    std::size_t total_len() const noexcept { return logprobs.size(); }
    void validate() const;
};

/// exp(lt) / (exp(lt) + exp(lf)), computed shift-stably.
double true_false_score(double logit_true, double logit_false);

/// exp of the mean answer-span log-probability; in (0,1].
double inverse_perplexity_score(const SequenceLogProbs& seq);

/// Max component of the softmax over K >= 2 answer logits; in [1/K, 1].
double multiple_choice_score(std::span<const double> answer_logits);

}  // namespace mcal
