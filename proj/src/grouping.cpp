#include "mcal/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcal/rng.hpp"

namespace mcal {
namespace grouping {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

void flag_empty_groups(const GroupMatrix& groups, std::vector<std::string>& warnings) {
    for (std::size_t k = 0; k < groups.group_count(); ++k)
        if (groups.count(k) == 0)
            warnings.push_back("group '" + groups.name(k) + "' is empty");
}

}  // namespace

FeatureTable::FeatureTable(std::size_t n_rows, std::size_t n_cols, std::vector<double> values,
                           std::vector<std::string> names)
    : n_(n_rows), d_(n_cols), values_(std::move(values)), names_(std::move(names)) {
    if (values_.size() != n_ * d_) throw DataError("FeatureTable: values size mismatch");
    if (names_.size() != d_) throw DataError("FeatureTable: column name count mismatch");
    for (double v : values_)
        if (!std::isfinite(v)) throw DataError("FeatureTable: non-finite feature value");
}

GroupingResult groups_from_annotations(std::size_t n_rows,
                                       std::vector<std::vector<std::uint8_t>> columns,
                                       std::vector<std::string> names) {
    auto groups = GroupMatrix::with_all_column(n_rows, std::move(columns), std::move(names));
    GroupingResult result{std::move(groups), {}};
    flag_empty_groups(result.groups, result.warnings);
    return result;
}

GroupingResult cluster_groups(const FeatureTable& features, std::size_t k, std::uint64_t seed) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (k < 2) throw ConfigError("cluster_groups: k must be >= 2");
    if (n < k) throw DataError("TooFewSamples: n < k");

    Rng rng(seed);
    std::vector<std::vector<double>> centers;
    centers.reserve(k);

    // k-means++ seeding.
    {
        const std::size_t first = rng.uniform_index(n);
        centers.emplace_back(features.row(first).begin(), features.row(first).end());
        std::vector<double> d2(n);
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& center : centers)
                    best = std::min(best, sq_dist(features.row(i), center));
                d2[i] = best;
                total += best;
            }
            std::size_t pick;
            if (total <= 0.0) {
                pick = rng.uniform_index(n);  // all points coincide with a center
            } else {
                const double target = rng.uniform01() * total;
                double run = 0.0;
                pick = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    run += d2[i];
                    if (run >= target) {
                        pick = i;
                        break;
                    }
                }
            }
            centers.emplace_back(features.row(pick).begin(), features.row(pick).end());
        }
    }

    std::vector<std::size_t> assign(n, 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 100; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double dist = sq_dist(features.row(i), centers[c]);
                if (dist < best) {  // strict: ties keep the lowest center index
                    best = dist;
                    best_c = c;
                }
            }
            assign[i] = best_c;
            inertia += best;
        }

        std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[assign[i]] += 1;
            const auto row = features.row(i);
            for (std::size_t j = 0; j < d; ++j) sums[assign[i]][j] += row[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its old center
            for (std::size_t j = 0; j < d; ++j)
                centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }

        if (std::abs(prev_inertia - inertia) <= 1e-6 * std::max(prev_inertia, 1e-300)) break;
        prev_inertia = inertia;
    }

    std::vector<std::vector<std::uint8_t>> columns(k, std::vector<std::uint8_t>(n, 0));
    std::vector<std::string> names(k);
    for (std::size_t c = 0; c < k; ++c) names[c] = "cluster_" + std::to_string(c);
    for (std::size_t i = 0; i < n; ++i) columns[assign[i]][i] = 1;

    auto groups = GroupMatrix::with_all_column(n, std::move(columns), std::move(names));
    GroupingResult result{std::move(groups), {}};
    flag_empty_groups(result.groups, result.warnings);
    return result;
}

GroupingResult groups_from_thresholds(const FeatureTable& features,
                                      std::span<const ThresholdRule> rules) {
    const std::size_t n = features.rows();
    std::vector<std::vector<std::uint8_t>> columns;
    std::vector<std::string> names;
    for (const auto& rule : rules) {
        auto it = std::find(features.names().begin(), features.names().end(), rule.column);
        if (it == features.names().end())
            throw DataError("UnknownColumn: '" + rule.column + "'");
        const auto col = static_cast<std::size_t>(it - features.names().begin());
        std::vector<std::uint8_t> bits(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = features.at(i, col);
            bits[i] = (rule.geq ? v >= rule.cutoff : v < rule.cutoff) ? 1 : 0;
        }
        columns.push_back(std::move(bits));
        names.push_back(rule.name);
    }
    auto groups = GroupMatrix::with_all_column(n, std::move(columns), std::move(names));
    GroupingResult result{std::move(groups), {}};
    flag_empty_groups(result.groups, result.warnings);
    return result;
}

}  // namespace grouping
}  // namespace mcal
