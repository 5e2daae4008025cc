#include "mcal/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mcal/rng.hpp"

namespace mcal {

namespace {

bool csv_safe_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') return false;
    }
    return true;
}

}  // namespace

GroupMatrix::GroupMatrix(std::size_t n_rows, std::vector<std::vector<std::uint8_t>> columns,
                         std::vector<std::string> names)
    : n_(n_rows), columns_(std::move(columns)), names_(std::move(names)) {
    if (names_.empty()) throw DataError("GroupMatrix: need at least one group");
    if (columns_.size() != names_.size())
        throw DataError("GroupMatrix: column/name count mismatch");

    std::set<std::string> seen;
    bool has_all = false;
    for (std::size_t k = 0; k < names_.size(); ++k) {
        const auto& name = names_[k];
        if (!csv_safe_name(name))
            throw DataError("GroupMatrix: invalid group name '" + name + "'");
        if (!seen.insert(name).second)
            throw DataError("DuplicateGroupName: '" + name + "'");
        if (columns_[k].size() != n_)
            throw DataError("GroupMatrix: column '" + name + "' has wrong length");
        for (auto& cell : columns_[k]) cell = cell ? 1 : 0;
        if (name == kAllGroup) {
            has_all = true;
            for (std::size_t i = 0; i < n_; ++i)
                if (!columns_[k][i])
                    throw DataError("GroupMatrix: reserved ALL column must be all-true");
        }
    }
    if (!has_all) throw DataError("GroupMatrix: reserved ALL column is missing");
}

GroupMatrix GroupMatrix::with_all_column(std::size_t n_rows,
                                         std::vector<std::vector<std::uint8_t>> columns,
                                         std::vector<std::string> names) {
    for (const auto& name : names)
        if (name == kAllGroup)
            throw DataError("NameCollision: group name 'ALL' is reserved");
    std::vector<std::vector<std::uint8_t>> cols;
    cols.reserve(columns.size() + 1);
    cols.emplace_back(n_rows, std::uint8_t{1});
    for (auto& c : columns) cols.push_back(std::move(c));
    std::vector<std::string> all_names;
    all_names.reserve(names.size() + 1);
    all_names.emplace_back(kAllGroup);
    for (auto& n : names) all_names.push_back(std::move(n));
    return GroupMatrix(n_rows, std::move(cols), std::move(all_names));
}

GroupMatrix GroupMatrix::all_only(std::size_t n_rows) {
    return GroupMatrix(n_rows, {std::vector<std::uint8_t>(n_rows, 1)}, {kAllGroup});
}

std::size_t GroupMatrix::count(std::size_t k) const {
    const auto& col = columns_.at(k);
    return static_cast<std::size_t>(std::count(col.begin(), col.end(), std::uint8_t{1}));
}

std::optional<std::size_t> GroupMatrix::index_of(const std::string& name) const {
    for (std::size_t k = 0; k < names_.size(); ++k)
        if (names_[k] == name) return k;
    return std::nullopt;
}

GroupMatrix GroupMatrix::select_rows(std::span<const std::size_t> rows) const {
    std::vector<std::vector<std::uint8_t>> cols(columns_.size());
    for (std::size_t k = 0; k < columns_.size(); ++k) {
        cols[k].resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) cols[k][i] = columns_[k][rows[i]];
    }
    return GroupMatrix(rows.size(), std::move(cols), names_);
}

ScoredDataset::ScoredDataset(std::vector<double> scores, std::vector<int> labels,
                             GroupMatrix groups)
    : scores_(std::move(scores)), labels_(std::move(labels)), groups_(std::move(groups)) {
    if (scores_.empty()) throw DataError("ScoredDataset: empty dataset");
    if (labels_.size() != scores_.size())
        throw DataError("LengthMismatch: scores vs labels");
    if (groups_.rows() != scores_.size())
        throw DataError("LengthMismatch: scores vs groups");
    for (std::size_t i = 0; i < scores_.size(); ++i) {
        const double s = scores_[i];
        if (!(s >= 0.0 && s <= 1.0))
            throw DataError("ScoreOutOfRange at row " + std::to_string(i));
        if (labels_[i] != 0 && labels_[i] != 1)
            throw DataError("NonBinaryLabel at row " + std::to_string(i));
    }
}

ScoredDataset ScoredDataset::select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> s(rows.size());
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s[i] = scores_[rows[i]];
        y[i] = labels_[rows[i]];
    }
    return ScoredDataset(std::move(s), std::move(y), groups_.select_rows(rows));
}

ScoredDataset ScoredDataset::with_scores(std::vector<double> scores) const {
    return ScoredDataset(std::move(scores), labels_, groups_);
}

ValidationResult validate_dataset(std::vector<double> scores, std::vector<int> labels,
                                  std::vector<std::vector<std::uint8_t>> group_columns,
                                  std::vector<std::string> group_names) {
    ValidationResult result;
    const std::size_t n = scores.size();

    if (labels.size() != n)
        result.violations.push_back({ViolationKind::LengthMismatch, -1,
                                     "scores has " + std::to_string(n) + " rows, labels has " +
                                         std::to_string(labels.size())});
    for (const auto& col : group_columns)
        if (col.size() != n) {
            result.violations.push_back(
                {ViolationKind::LengthMismatch, -1, "group column length != scores length"});
            break;
        }

    for (std::size_t i = 0; i < n; ++i)
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
            result.violations.push_back({ViolationKind::ScoreOutOfRange,
                                         static_cast<std::ptrdiff_t>(i),
                                         "score out of [0,1] at row " + std::to_string(i)});
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 0 && labels[i] != 1)
            result.violations.push_back({ViolationKind::NonBinaryLabel,
                                         static_cast<std::ptrdiff_t>(i),
                                         "label not in {0,1} at row " + std::to_string(i)});

    std::set<std::string> seen;
    for (const auto& name : group_names)
        if (!seen.insert(name).second)
            result.violations.push_back(
                {ViolationKind::DuplicateGroupName, -1, "duplicate group name '" + name + "'"});

    if (!result.violations.empty()) return result;

    // "ALL" may be supplied explicitly (round-trip of our own CSV) or added here.
    GroupMatrix groups =
        std::find(group_names.begin(), group_names.end(), kAllGroup) != group_names.end()
            ? GroupMatrix(n, std::move(group_columns), std::move(group_names))
            : GroupMatrix::with_all_column(n, std::move(group_columns), std::move(group_names));
    result.dataset = ScoredDataset(std::move(scores), std::move(labels), std::move(groups));
    return result;
}

std::pair<ScoredDataset, ScoredDataset> split(const ScoredDataset& data, double fraction,
                                              std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split: fraction must be in (0,1)");
    const std::size_t n = data.size();
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
    if (k == 0 || k >= n) throw DataError("DegenerateSplit: a side would be empty");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

    std::vector<std::size_t> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<std::size_t> second(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());
    // Original row order within each side keeps downstream passes cache-friendly
    // and the partition easy to diff.
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {data.select_rows(first), data.select_rows(second)};
}

Grid::Grid(int m) : m_(m) {
    if (m < 1) throw ConfigError("Grid: m must be >= 1");
    levels_.resize(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) levels_[static_cast<std::size_t>(i)] = static_cast<double>(i) / m;
}

Grid Grid::for_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("Grid: alpha must be in (0,1)");
    // The epsilon guards against 1/alpha landing one ulp above an integer.
    return Grid(static_cast<int>(std::ceil(1.0 / alpha - 1e-9)));
}

int Grid::round_index(double s) const noexcept {
    const double t = s * m_;
    const double f = std::floor(t);
    const double frac = t - f;
    double i = (frac > 0.5) ? f + 1.0 : f;  // exact tie -> lower grid point
    i = std::min(std::max(i, 0.0), static_cast<double>(m_));
    return static_cast<int>(i);
}

double Grid::round(double s) const noexcept {
    return levels_[static_cast<std::size_t>(round_index(s))];
}

std::optional<int> Grid::index_of(double s) const noexcept {
    const int i = round_index(s);
    if (levels_[static_cast<std::size_t>(i)] == s) return i;
    return std::nullopt;
}

std::vector<double> round_to_grid(std::span<const double> scores, int m) {
    Grid grid(m);
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = grid.round(scores[i]);
    return out;
}

const char* to_string(Comparator c) {
    switch (c) {
        case Comparator::EQ: return "EQ";
        case Comparator::LE: return "LE";
        case Comparator::GE: return "GE";
    }
    return "EQ";
}

Comparator comparator_from_string(const std::string& s) {
    if (s == "EQ") return Comparator::EQ;
    if (s == "LE") return Comparator::LE;
    if (s == "GE") return Comparator::GE;
    throw ConfigError("unknown comparator '" + s + "'");
}

const char* to_string(Method m) {
    switch (m) {
        case Method::HB: return "HB";
        case Method::LS: return "LS";
        case Method::GCUR: return "GCUR";
        case Method::GCULR: return "GCULR";
        case Method::IGHB: return "IGHB";
        case Method::IGLB: return "IGLB";
    }
    return "HB";
}

Method method_from_string(const std::string& s) {
    if (s == "HB") return Method::HB;
    if (s == "LS") return Method::LS;
    if (s == "GCUR") return Method::GCUR;
    if (s == "GCULR") return Method::GCULR;
    if (s == "IGHB") return Method::IGHB;
    if (s == "IGLB") return Method::IGLB;
    throw ConfigError("unknown method '" + s + "'");
}

void CalibratedModel::validate() const {
    if (m < 1) throw DataError("CalibratedModel: m must be >= 1");
    if (parametric()) {
        if (!patches.empty())
            throw DataError("CalibratedModel: parametric method carries patches");
        const std::size_t expected = method == Method::LS      ? 2
                                     : method == Method::GCUR ? group_names.size()
                                                              : group_names.size() + 1;
        if (coefficients.size() != expected)
            throw DataError("CalibratedModel: " + std::string(to_string(method)) +
                            " needs " + std::to_string(expected) + " coefficients, has " +
                            std::to_string(coefficients.size()));
    } else {
        if (!coefficients.empty())
            throw DataError("CalibratedModel: patch method carries coefficients");
    }
    Grid grid(m);
    for (const auto& p : patches) {
        if (!grid.index_of(p.bin.level))
            throw DataError("CalibratedModel: patch level off-grid");
        if (p.bin.group_index >= group_names.size())
            throw DataError("CalibratedModel: patch group index out of range");
    }
}

}  // namespace mcal
