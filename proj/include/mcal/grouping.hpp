#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcal/data_model.hpp"

namespace mcal {
namespace grouping {

/// n x d per-sample feature matrix (row-major) with column names.
class FeatureTable {
public:
    FeatureTable(std::size_t n_rows, std::size_t n_cols, std::vector<double> values,
                 std::vector<std::string> names);

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return d_; }
    double at(std::size_t row, std::size_t col) const { return values_[row * d_ + col]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * d_, d_}; }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

struct GroupingResult {
    GroupMatrix groups;
    std::vector<std::string> warnings;  // e.g. empty groups
};

/// Wraps caller-supplied boolean annotations into a GroupMatrix (ALL column
/// prepended). Membership bits are passed through untouched; empty groups are
/// kept but flagged.
GroupingResult groups_from_annotations(std::size_t n_rows,
                                       std::vector<std::vector<std::uint8_t>> columns,
                                       std::vector<std::string> names);

/// Hard k-means (k-means++ init, Lloyd iterations, max 100 rounds or relative
/// inertia change < 1e-6). Output columns partition the rows; deterministic
/// for a fixed seed.
GroupingResult cluster_groups(const FeatureTable& features, std::size_t k, std::uint64_t seed);

struct ThresholdRule {
    std::string column;
    bool geq = true;  // true: feature >= cutoff, false: feature < cutoff
    double cutoff = 0.0;
    std::string name;
};

/// One boolean column per rule; rules may overlap.
GroupingResult groups_from_thresholds(const FeatureTable& features,
                                      std::span<const ThresholdRule> rules);

}  // namespace grouping
}  // namespace mcal
