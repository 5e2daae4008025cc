#include "mcal/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mcal {
namespace metrics {

namespace {

struct Accum {
    std::size_t count = 0;
    double sum_label = 0.0;
    double sum_score = 0.0;
};

// Rows grouped by exact score value, in ascending score order.
std::map<double, Accum> exact_level_sets(std::span<const double> scores,
                                         std::span<const int> labels,
                                         const std::uint8_t* mask) {
    std::map<double, Accum> sets;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (mask && !mask[i]) continue;
        Accum& a = sets[scores[i]];
        a.count += 1;
        a.sum_label += labels[i];
        a.sum_score += scores[i];
    }
    return sets;
}

double asce_of_sets(const std::map<double, Accum>& sets, std::size_t total) {
    if (total == 0) return 0.0;
    double acc = 0.0;
    for (const auto& [value, a] : sets) {
        const double b = a.sum_label / static_cast<double>(a.count) - value;
        acc += static_cast<double>(a.count) / static_cast<double>(total) * b * b;
    }
    return acc;
}

bool on_grid(std::span<const double> scores, const Grid& grid) {
    return std::all_of(scores.begin(), scores.end(),
                       [&](double s) { return grid.index_of(s).has_value(); });
}

// Scores rounded onto the grid when needed; notes it in warnings.
std::vector<double> gridded_scores(const ScoredDataset& data, const Grid& grid,
                                   Warnings* warnings, bool* rounded) {
    if (on_grid(data.scores(), grid)) {
        if (rounded) *rounded = false;
        return {data.scores().begin(), data.scores().end()};
    }
    if (warnings)
        warnings->push_back("off-grid scores rounded to m=" + std::to_string(grid.m()) +
                            " before level-set metrics");
    if (rounded) *rounded = true;
    return round_to_grid(data.scores(), grid.m());
}

// Per-level accumulation for on-grid scores, optionally masked.
std::vector<Accum> level_accums(std::span<const double> scores, std::span<const int> labels,
                                const Grid& grid, const std::uint8_t* mask) {
    std::vector<Accum> acc(static_cast<std::size_t>(grid.m()) + 1);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (mask && !mask[i]) continue;
        Accum& a = acc[static_cast<std::size_t>(grid.round_index(scores[i]))];
        a.count += 1;
        a.sum_label += labels[i];
        a.sum_score += scores[i];
    }
    return acc;
}

double gasce_from_accums(const std::vector<Accum>& acc, const Grid& grid,
                         std::size_t group_count) {
    double out = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (acc[i].count == 0) continue;
        const double b =
            acc[i].sum_label / static_cast<double>(acc[i].count) - grid.level(static_cast<int>(i));
        out += static_cast<double>(acc[i].count) / static_cast<double>(group_count) * b * b;
    }
    return out;
}

}  // namespace

double bias(std::span<const double> scores, std::span<const int> labels,
            std::span<const std::uint8_t> mask) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!mask[i]) continue;
        sum += labels[i] - scores[i];
        ++count;
    }
    if (count == 0) throw DataError("EmptyConditioningSet");
    return sum / static_cast<double>(count);
}

double mse(std::span<const double> scores, std::span<const int> labels) {
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double d = labels[i] - scores[i];
        sum += d * d;
    }
    return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
}

double mse(const ScoredDataset& data) { return mse(data.scores(), data.labels()); }

double asce_exact(std::span<const double> scores, std::span<const int> labels) {
    return asce_of_sets(exact_level_sets(scores, labels, nullptr), scores.size());
}

double asce(const ScoredDataset& data, const Grid& grid, Warnings* warnings) {
    const auto scores = gridded_scores(data, grid, warnings, nullptr);
    const auto acc = level_accums(scores, data.labels(), grid, nullptr);
    return gasce_from_accums(acc, grid, data.size());
}

double gasce_exact(std::span<const double> scores, std::span<const int> labels,
                   std::span<const std::uint8_t> group) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < group.size(); ++i) count += group[i] ? 1 : 0;
    if (count == 0) throw DataError("EmptyGroup");
    return asce_of_sets(exact_level_sets(scores, labels, group.data()), count);
}

double gasce(const ScoredDataset& data, const Grid& grid, std::size_t group_index,
             Warnings* warnings) {
    const auto group = data.groups().column(group_index);
    const std::size_t count = data.groups().count(group_index);
    if (count == 0) throw DataError("EmptyGroup: '" + data.groups().name(group_index) + "'");
    const auto scores = gridded_scores(data, grid, warnings, nullptr);
    const auto acc = level_accums(scores, data.labels(), grid, group.data());
    return gasce_from_accums(acc, grid, count);
}

double ece(std::span<const double> scores, std::span<const int> labels, int m) {
    if (m < 1) throw ConfigError("ece: m must be >= 1");
    struct EceAccum {
        std::size_t count = 0;
        double sum_conf = 0.0;
        double sum_acc = 0.0;
    };
    std::vector<EceAccum> bins(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double f = scores[i];
        // floor(f*m) can land one bin low when f sits exactly on a stored
        // edge double and the product rounds down; fix up against the edges
        // as actually computed.
        auto idx = static_cast<std::size_t>(
            std::min<double>(std::max(std::floor(f * m), 0.0), m - 1));
        while (idx > 0 && f < static_cast<double>(idx) / m) --idx;
        while (idx + 1 < static_cast<std::size_t>(m) &&
               f >= static_cast<double>(idx + 1) / m)
            ++idx;
        EceAccum& b = bins[idx];
        b.count += 1;
        b.sum_conf += std::max(f, 1.0 - f);
        b.sum_acc += (labels[i] == (f >= 0.5 ? 1 : 0)) ? 1.0 : 0.0;
    }
    double out = 0.0;
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        const double cnt = static_cast<double>(b.count);
        out += cnt / static_cast<double>(scores.size()) * std::abs(b.sum_acc / cnt - b.sum_conf / cnt);
    }
    return out;
}

double ece(const ScoredDataset& data, int m) { return ece(data.scores(), data.labels(), m); }

double accuracy(std::span<const double> scores, std::span<const int> labels) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        hits += (labels[i] == (scores[i] >= 0.5 ? 1 : 0)) ? 1 : 0;
    return scores.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(scores.size());
}

std::pair<double, std::size_t> violation_on_grid(std::span<const double> scores,
                                                 std::span<const int> labels,
                                                 const GroupMatrix& groups, const Grid& grid) {
    double best = -1.0;
    std::size_t best_k = 0;
    bool any = false;
    for (std::size_t k = 0; k < groups.group_count(); ++k) {
        const std::size_t count = groups.count(k);
        if (count == 0) continue;
        any = true;
        const auto acc = level_accums(scores, labels, grid, groups.column(k).data());
        const double g = gasce_from_accums(acc, grid, count);
        const double v = static_cast<double>(count) / static_cast<double>(scores.size()) * g;
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    if (!any) throw DataError("AllGroupsEmpty");
    return {best, best_k};
}

std::pair<double, std::string> multicalibration_violation(const ScoredDataset& data,
                                                          const Grid& grid, Warnings* warnings) {
    const auto scores = gridded_scores(data, grid, warnings, nullptr);
    auto [v, k] = violation_on_grid(scores, data.labels(), data.groups(), grid);
    return {v, data.groups().name(k)};
}

CalibrationReport report(const ScoredDataset& data, const Grid& grid) {
    CalibrationReport rep;
    Warnings warn;
    const auto scores = gridded_scores(data, grid, &warn, &rep.scores_rounded);
    const auto n = static_cast<double>(data.size());

    rep.mse = mse(data);
    rep.ece = ece(data, grid.m());
    rep.accuracy = accuracy(data.scores(), data.labels());

    const auto& groups = data.groups();
    double worst = -1.0;
    for (std::size_t k = 0; k < groups.group_count(); ++k) {
        GroupReport g;
        g.name = groups.name(k);
        const std::size_t count = groups.count(k);
        g.empty = count == 0;
        if (!g.empty) {
            const auto col = groups.column(k);
            double sum_s = 0.0;
            double sum_y = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (!col[i]) continue;
                sum_s += data.scores()[i];
                sum_y += data.labels()[i];
            }
            g.mass = static_cast<double>(count) / n;
            g.mean_score = sum_s / static_cast<double>(count);
            g.mean_label = sum_y / static_cast<double>(count);
            const auto acc = level_accums(scores, data.labels(), grid, col.data());
            g.gasce = gasce_from_accums(acc, grid, count);
            g.violation = g.mass * g.gasce;
            if (g.violation > worst) {
                worst = g.violation;
                rep.worst_group = g.name;
                rep.max_violation = g.violation;
            }
            if (g.name == kAllGroup) rep.asce = g.gasce;
        }
        rep.per_group.push_back(std::move(g));
    }

    const auto marginal = level_accums(scores, data.labels(), grid, nullptr);
    for (std::size_t i = 0; i < marginal.size(); ++i) {
        if (marginal[i].count == 0) continue;
        BinStats b;
        b.bin = {grid.level(static_cast<int>(i)), Comparator::EQ, 0};
        b.count = marginal[i].count;
        b.mass = static_cast<double>(b.count) / n;
        b.mean_label = marginal[i].sum_label / static_cast<double>(b.count);
        b.mean_score = marginal[i].sum_score / static_cast<double>(b.count);
        b.bias = b.mean_label - b.mean_score;
        b.defined = true;
        rep.per_bin.push_back(b);
    }

    // Prop-style sanity: the Brier score never undershoots the grid ASCE.
    if (!rep.scores_rounded && rep.mse < rep.asce - 1e-10)
        throw NumericError("report: mse < asce beyond tolerance");
    return rep;
}

}  // namespace metrics
}  // namespace mcal
