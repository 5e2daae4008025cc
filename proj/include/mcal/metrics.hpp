#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcal/data_model.hpp"

namespace mcal {
namespace metrics {

using Warnings = std::vector<std::string>;

/// Empirical stats of one conditioning set.
struct BinStats {
    BinDescriptor bin;
    std::size_t count = 0;
    double mass = 0.0;        // count / n
    double mean_label = 0.0;  // undefined when count == 0
    double mean_score = 0.0;
    double bias = 0.0;        // mean_label - mean_score
    bool defined = false;     // false iff count == 0
};

struct GroupReport {
    std::string name;
    double mass = 0.0;
    double mean_score = 0.0;
    double mean_label = 0.0;
    double gasce = 0.0;
    double violation = 0.0;  // mass * gasce
    bool empty = false;
};

struct CalibrationReport {
    double asce = 0.0;
    double mse = 0.0;
    double ece = 0.0;
    double accuracy = 0.0;
    double max_violation = 0.0;
    std::string worst_group;
    std::vector<GroupReport> per_group;
    std::vector<BinStats> per_bin;  // nonempty marginal level sets
    bool scores_rounded = false;    // true when off-grid scores were rounded for level-set metrics
};

/// Mean of (label - score) over the rows selected by mask.
/// Throws DataError (EmptyConditioningSet) when mask selects nothing.
double bias(std::span<const double> scores, std::span<const int> labels,
            std::span<const std::uint8_t> mask);

/// Mean squared error (Brier score).
double mse(std::span<const double> scores, std::span<const int> labels);
double mse(const ScoredDataset& data);

/// ASCE over the exact level sets of the scores (the distinct score values).
double asce_exact(std::span<const double> scores, std::span<const int> labels);

/// ASCE on the grid: off-grid scores are rounded first (noted in warnings).
double asce(const ScoredDataset& data, const Grid& grid, Warnings* warnings = nullptr);

/// gASCE over exact level sets within a group.
double gasce_exact(std::span<const double> scores, std::span<const int> labels,
                   std::span<const std::uint8_t> group);

/// gASCE on the grid, conditioned on membership in group column k.
/// Throws DataError (EmptyGroup) when the group has no rows.
double gasce(const ScoredDataset& data, const Grid& grid, std::size_t group_index,
             Warnings* warnings = nullptr);

/// Expected calibration error with m half-open bins [(i-1)/m, i/m), the last
/// closed; confidence = max(f, 1-f), predicted label = 1[f >= 1/2].
double ece(std::span<const double> scores, std::span<const int> labels, int m);
double ece(const ScoredDataset& data, int m);

/// Fraction of rows where label == 1[score >= 1/2].
double accuracy(std::span<const double> scores, std::span<const int> labels);

/// max over groups of mass(g) * gasce(g) and its argmax; ties resolve to the
/// lowest group index. Empty groups are skipped; throws DataError
/// (AllGroupsEmpty) when every group is empty.
std::pair<double, std::string> multicalibration_violation(const ScoredDataset& data,
                                                          const Grid& grid,
                                                          Warnings* warnings = nullptr);

/// Span-based core for the fitting loops: scores must already be on-grid.
/// Returns (max violation, argmax group index); skips empty groups.
std::pair<double, std::size_t> violation_on_grid(std::span<const double> scores,
                                                 std::span<const int> labels,
                                                 const GroupMatrix& groups, const Grid& grid);

/// Aggregate report: level-set metrics on the grid, mse/ece/accuracy on the
/// scores as given.
CalibrationReport report(const ScoredDataset& data, const Grid& grid);

}  // namespace metrics
}  // namespace mcal
