#include "mcal/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace mcal {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DataError(std::string("NonFiniteInput: ") + what);
}

}  // namespace

TokenLogits::TokenLogits(std::vector<double> values,
                         std::unordered_map<std::string, std::size_t> index)
    : values_(std::move(values)), index_(std::move(index)) {
    for (double v : values_) require_finite(v, "token logit");
    for (const auto& [token, pos] : index_)
        if (pos >= values_.size())
            throw DataError("TokenLogits: index for '" + token + "' out of range");
}

double TokenLogits::logit_for(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) throw DataError("TokenLogits: token '" + token + "' not present");
    return values_[it->second];
}

void SequenceLogProbs::validate() const {
    if (prompt_len >= logprobs.size())
        throw DataError("EmptyAnswerSpan: prompt_len >= total_len");
    for (double lp : logprobs) {
        require_finite(lp, "logprob");
        if (lp > 0.0) throw DataError("SequenceLogProbs: logprob > 0");
    }
}

double true_false_score(double logit_true, double logit_false) {
    require_finite(logit_true, "logit_true");
    require_finite(logit_false, "logit_false");
    const double mx = std::max(logit_true, logit_false);
    const double et = std::exp(logit_true - mx);
    const double ef = std::exp(logit_false - mx);
    return et / (et + ef);
}

double inverse_perplexity_score(const SequenceLogProbs& seq) {
    seq.validate();
    double sum = 0.0;
    for (std::size_t t = seq.prompt_len; t < seq.logprobs.size(); ++t) sum += seq.logprobs[t];
    const auto span_len = static_cast<double>(seq.logprobs.size() - seq.prompt_len);
    return std::exp(sum / span_len);
}

double multiple_choice_score(std::span<const double> answer_logits) {
    const std::size_t k = answer_logits.size();
    if (k < 2) throw DataError("TooFewChoices: need K >= 2 answer logits");
    double mx = answer_logits[0];
    for (double v : answer_logits) {
        require_finite(v, "answer logit");
        mx = std::max(mx, v);
    }
    double total = 0.0;
    double best = 0.0;
    for (double v : answer_logits) {
        const double e = std::exp(v - mx);
        total += e;
        best = std::max(best, e);
    }
    // max softmax component is >= 1/K mathematically; pin the bound against
    // the last-ulp wobble of the normalization.
    const double s = best / total;
    return std::min(1.0, std::max(s, 1.0 / static_cast<double>(k)));
}

}  // namespace mcal
