#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mcal/error.hpp"

namespace mcal {

// Reserved group that is all-true in every GroupMatrix. Marginal calibration
// is the single-group special case over this column.
inline constexpr const char* kAllGroup = "ALL";

/// Boolean membership of n samples in K named, possibly overlapping groups.
/// Column 0 is always the reserved all-true "ALL" column; storage is
/// column-major so per-group scans are contiguous.
class GroupMatrix {
public:
    // `columns[k]` holds column k's n memberships; names must be unique,
    // non-empty, CSV-safe, and include "ALL" only as an all-true column.
    GroupMatrix(std::size_t n_rows, std::vector<std::vector<std::uint8_t>> columns,
                std::vector<std::string> names);

    // Prepends the ALL column to caller-supplied group columns.
    static GroupMatrix with_all_column(std::size_t n_rows,
                                       std::vector<std::vector<std::uint8_t>> columns,
                                       std::vector<std::string> names);

    // n x 1 matrix holding just the ALL column.
    static GroupMatrix all_only(std::size_t n_rows);

    std::size_t rows() const noexcept { return n_; }
    std::size_t group_count() const noexcept { return names_.size(); }
    std::span<const std::uint8_t> column(std::size_t k) const { return columns_.at(k); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(std::size_t k) const { return names_.at(k); }
    bool member(std::size_t row, std::size_t k) const { return columns_[k][row] != 0; }
    std::size_t count(std::size_t k) const;
    std::optional<std::size_t> index_of(const std::string& name) const;

    // Rows re-ordered / subsetted by `rows` (indices into this matrix).
    GroupMatrix select_rows(std::span<const std::size_t> rows) const;

private:
    std::size_t n_ = 0;
    std::vector<std::vector<std::uint8_t>> columns_;
    std::vector<std::string> names_;
};

/// Scores in [0,1], binary labels, and group memberships of common length.
/// Immutable after construction; construction validates the invariants.
class ScoredDataset {
public:
    ScoredDataset(std::vector<double> scores, std::vector<int> labels, GroupMatrix groups);

    std::size_t size() const noexcept { return scores_.size(); }
    std::span<const double> scores() const noexcept { return scores_; }
    std::span<const int> labels() const noexcept { return labels_; }
    const GroupMatrix& groups() const noexcept { return groups_; }

    ScoredDataset select_rows(std::span<const std::size_t> rows) const;
    ScoredDataset with_scores(std::vector<double> scores) const;

private:
    std::vector<double> scores_;
    std::vector<int> labels_;
    GroupMatrix groups_;
};

enum class ViolationKind { LengthMismatch, ScoreOutOfRange, NonBinaryLabel, DuplicateGroupName };

struct Violation {
    ViolationKind kind;
    std::ptrdiff_t index;  // row index, or -1 when not row-specific
    std::string message;
};

struct ValidationResult {
    std::optional<ScoredDataset> dataset;  // set iff violations empty
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
};

/// Non-throwing construction: collects every violation instead of failing on
/// the first one. Group columns must already be sized like `scores`.
ValidationResult validate_dataset(std::vector<double> scores, std::vector<int> labels,
                                  std::vector<std::vector<std::uint8_t>> group_columns,
                                  std::vector<std::string> group_names);

/// Deterministic disjoint row split; first part receives
/// round(n * fraction) rows. Throws DataError (DegenerateSplit) if either
/// side would be empty.
std::pair<ScoredDataset, ScoredDataset> split(const ScoredDataset& data, double fraction,
                                              std::uint64_t seed);

/// Uniform grid {i/m : i = 0..m}.
class Grid {
public:
    explicit Grid(int m);
    static Grid for_alpha(double alpha);  // m = ceil(1/alpha)

    int m() const noexcept { return m_; }
    std::span<const double> levels() const noexcept { return levels_; }
    double level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }

    /// Nearest grid point; exact halfway ties resolve to the lower point.
    double round(double s) const noexcept;
    int round_index(double s) const noexcept;

    /// Index of an exactly on-grid value, or nullopt if s is off-grid.
    std::optional<int> index_of(double s) const noexcept;

private:
    int m_;
    std::vector<double> levels_;
};

/// Rounds every score to the grid {i/m}; ties toward the lower point.
std::vector<double> round_to_grid(std::span<const double> scores, int m);

enum class Comparator { EQ, LE, GE };

const char* to_string(Comparator c);
Comparator comparator_from_string(const std::string& s);

/// One conditioning event: {f(x) cmp level} intersected with a group.
struct BinDescriptor {
    double level = 0.0;       // a grid value i/m
    Comparator cmp = Comparator::EQ;
    std::size_t group_index = 0;
};

struct ConstantShift {
    double delta = 0.0;
    bool operator==(const ConstantShift&) const = default;
};

struct LogitLinear {
    double alpha = 0.0;  // intercept in logit space
    double beta = 1.0;   // slope on logit(score)
    bool operator==(const LogitLinear&) const = default;
};

using PatchTransform = std::variant<ConstantShift, LogitLinear>;

/// One applied correction: rows matching `bin` get `transform`.
struct Patch {
    BinDescriptor bin;
    PatchTransform transform;
};

enum class Method { HB, LS, GCUR, GCULR, IGHB, IGLB };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

/// Fitted calibrator. Patch-sequence methods (HB/IGHB/IGLB) replay their
/// training-time composition at prediction time; parametric methods
/// (LS/GCUR/GCULR) evaluate a closed form from `coefficients`.
struct CalibratedModel {
    int m = 1;
    Method method = Method::HB;
    std::vector<Patch> patches;
    std::vector<double> coefficients;
    std::vector<std::string> group_names;

    // Enforces the patches-xor-coefficients invariant.
    void validate() const;
    bool parametric() const noexcept {
        return method == Method::LS || method == Method::GCUR || method == Method::GCULR;
    }
};

}  // namespace mcal
