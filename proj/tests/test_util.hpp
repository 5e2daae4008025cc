#pragma once

// Shared generators and independent oracles for the test suites. Oracles are
// written naively (maps and explicit loops) on purpose: they must not share a
// code path with the library functions they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "mcal/data_model.hpp"
#include "mcal/rng.hpp"

namespace testutil {

// --- independent metric oracles ---------------------------------------------

inline double oracle_mse(std::span<const double> s, std::span<const int> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += (y[i] - s[i]) * (y[i] - s[i]);
    return acc / static_cast<double>(s.size());
}

// Group rows by exact score value, sum mass * bias^2.
inline double oracle_asce_exact(std::span<const double> s, std::span<const int> y,
                                const std::vector<std::uint8_t>* mask = nullptr) {
    std::map<double, std::vector<std::size_t>> sets;
    std::size_t total = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        sets[s[i]].push_back(i);
        ++total;
    }
    double acc = 0.0;
    for (const auto& [value, rows] : sets) {
        double mean_y = 0.0;
        for (auto i : rows) mean_y += y[i];
        mean_y /= static_cast<double>(rows.size());
        const double b = mean_y - value;
        acc += static_cast<double>(rows.size()) / static_cast<double>(total) * b * b;
    }
    return acc;
}

// Within-level label variance term of the Brier decomposition (population
// convention, binary labels: mean * (1 - mean)).
inline double oracle_within_bin_variance(std::span<const double> s, std::span<const int> y) {
    std::map<double, std::vector<std::size_t>> sets;
    for (std::size_t i = 0; i < s.size(); ++i) sets[s[i]].push_back(i);
    double acc = 0.0;
    for (const auto& [value, rows] : sets) {
        double mean_y = 0.0;
        for (auto i : rows) mean_y += y[i];
        mean_y /= static_cast<double>(rows.size());
        acc += static_cast<double>(rows.size()) / static_cast<double>(s.size()) * mean_y *
               (1.0 - mean_y);
    }
    return acc;
}

inline double oracle_ece(std::span<const double> s, std::span<const int> y, int m) {
    double acc = 0.0;
    for (int b = 1; b <= m; ++b) {
        const double lo = static_cast<double>(b - 1) / m;
        const double hi = static_cast<double>(b) / m;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const bool in = (b == m) ? (s[i] >= lo && s[i] <= hi) : (s[i] >= lo && s[i] < hi);
            if (in) rows.push_back(i);
        }
        if (rows.empty()) continue;
        double conf = 0.0, correct = 0.0;
        for (auto i : rows) {
            conf += std::max(s[i], 1.0 - s[i]);
            correct += (y[i] == (s[i] >= 0.5 ? 1 : 0)) ? 1.0 : 0.0;
        }
        const double cnt = static_cast<double>(rows.size());
        acc += cnt / static_cast<double>(s.size()) * std::abs(correct / cnt - conf / cnt);
    }
    return acc;
}

// Mean of (y - s) over a conditioning set; NaN when empty.
inline double oracle_bias(std::span<const double> s, std::span<const int> y,
                          const std::vector<std::uint8_t>& mask) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!mask[i]) continue;
        acc += y[i] - s[i];
        ++cnt;
    }
    return cnt ? acc / static_cast<double>(cnt) : std::nan("");
}

// Extended-precision softmax maximum for the scoring oracle.
inline long double oracle_softmax_max(std::span<const double> logits) {
    long double mx = logits[0];
    for (double v : logits) mx = std::max<long double>(mx, v);
    long double total = 0.0L;
    long double best = 0.0L;
    for (double v : logits) {
        const long double e = expl(static_cast<long double>(v) - mx);
        total += e;
        best = std::max(best, e);
    }
    return best / total;
}

// --- dataset generators -------------------------------------------------------

// Random on-grid dataset: scores are random grid levels, labels Bernoulli
// with a random per-level probability, groups are ALL + `extra` random
// Bernoulli columns.
inline mcal::ScoredDataset random_grid_dataset(mcal::Rng& rng, std::size_t n, int m,
                                               std::size_t extra_groups) {
    std::vector<double> per_level_p(static_cast<std::size_t>(m) + 1);
    for (auto& p : per_level_p) p = rng.uniform01();
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = rng.uniform_index(static_cast<std::uint64_t>(m) + 1);
        scores[i] = static_cast<double>(idx) / m;
        labels[i] = rng.bernoulli(per_level_p[idx]) ? 1 : 0;
    }
    std::vector<std::vector<std::uint8_t>> cols(extra_groups,
                                                std::vector<std::uint8_t>(n, 0));
    std::vector<std::string> names;
    for (std::size_t g = 0; g < extra_groups; ++g) {
        const double rate = 0.2 + 0.6 * rng.uniform01();
        for (std::size_t i = 0; i < n; ++i) cols[g][i] = rng.bernoulli(rate) ? 1 : 0;
        names.push_back("g" + std::to_string(g));
    }
    auto groups = mcal::GroupMatrix::with_all_column(n, std::move(cols), std::move(names));
    return mcal::ScoredDataset(std::move(scores), std::move(labels), std::move(groups));
}

// Random raw-score dataset (off-grid scores in [0,1]).
inline mcal::ScoredDataset random_raw_dataset(mcal::Rng& rng, std::size_t n,
                                              std::size_t extra_groups) {
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = rng.uniform01();
        labels[i] = rng.bernoulli(scores[i] * 0.6 + 0.2) ? 1 : 0;
    }
    std::vector<std::vector<std::uint8_t>> cols(extra_groups,
                                                std::vector<std::uint8_t>(n, 0));
    std::vector<std::string> names;
    for (std::size_t g = 0; g < extra_groups; ++g) {
        const double rate = 0.2 + 0.6 * rng.uniform01();
        for (std::size_t i = 0; i < n; ++i) cols[g][i] = rng.bernoulli(rate) ? 1 : 0;
        names.push_back("g" + std::to_string(g));
    }
    auto groups = mcal::GroupMatrix::with_all_column(n, std::move(cols), std::move(names));
    return mcal::ScoredDataset(std::move(scores), std::move(labels), std::move(groups));
}

// Dataset whose every (level, group) cell has exactly zero bias: each
// nonempty cell of a block partition holds m rows at level i/m with exactly i
// positive labels. Zero EQ-bin bias then holds for the blocks and for ALL.
inline mcal::ScoredDataset zero_eq_bias_dataset(mcal::Rng& rng, int m, std::size_t blocks) {
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::size_t> block_of;
    for (std::size_t b = 0; b < blocks; ++b) {
        bool any = false;
        for (int lvl = 0; lvl <= m; ++lvl) {
            const bool use = rng.bernoulli(0.5);
            if (!use && (any || lvl < m)) continue;
            any = true;
            for (int j = 0; j < m; ++j) {
                scores.push_back(static_cast<double>(lvl) / m);
                labels.push_back(j < lvl ? 1 : 0);
                block_of.push_back(b);
            }
        }
    }
    const std::size_t n = scores.size();
    std::vector<std::vector<std::uint8_t>> cols(blocks, std::vector<std::uint8_t>(n, 0));
    std::vector<std::string> names;
    for (std::size_t b = 0; b < blocks; ++b) names.push_back("block" + std::to_string(b));
    for (std::size_t i = 0; i < n; ++i) cols[block_of[i]][i] = 1;
    auto groups = mcal::GroupMatrix::with_all_column(n, std::move(cols), std::move(names));
    return mcal::ScoredDataset(std::move(scores), std::move(labels), std::move(groups));
}

}  // namespace testutil
