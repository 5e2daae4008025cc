#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcal/data_model.hpp"

namespace mcal {
namespace calib {

// Scores are clipped into [c, 1-c] before any logit transform.
inline constexpr double kScoreClip = 1e-6;

// Logit-linear patches on bins with fewer rows than this (or with
// single-class labels, or a constant score column) fall back to a constant
// shift; the logit fit is ill-posed there.
inline constexpr std::size_t kMinLogitFitRows = 8;

double expit(double t) noexcept;
double logit_clipped(double p) noexcept;

enum class PatchKind { ConstantShift, LogitLinear };

struct FitConfig {
    double alpha = 0.1;        // grid target; m = ceil(1/alpha)
    double epsilon = 0.0;      // minimum selected-bin mass (early stopping)
    int max_rounds = 0;        // 0 -> ceil(4/alpha^2)
    double val_fraction = 0.2; // share of rows held out for validation
    std::uint64_t seed = 0;
    std::vector<Comparator> comparators;  // bins searched each round
    PatchKind transform = PatchKind::ConstantShift;
    bool early_stopping = false;  // split + epsilon + validation-MSE stop

    int resolved_max_rounds() const;
    void validate() const;
};

struct FitRound {
    int round = 0;
    BinDescriptor bin;
    double mass = 0.0;
    double bias = 0.0;
    PatchTransform transform;
    double mse_calib = 0.0;               // after this round, on the calibration part
    std::optional<double> mse_val;        // after this round, on the validation part
};

struct FitTrace {
    double initial_mse = 0.0;
    std::optional<double> initial_val_mse;
    std::vector<FitRound> rounds;
    std::string stop_reason;  // converged | small_bin | validation_stop | round_limit |
                              // iteration_limit
    std::vector<std::string> warnings;
    int iterations = 0;       // parametric fits
    bool converged = true;    // parametric fits
    double clip_rate = 0.0;   // share of in-sample predictions clipped to [0,1]
};

struct FitResult {
    CalibratedModel model;
    FitTrace trace;
};

/// Histogram binning: one constant-shift patch per nonempty level set.
/// The fitted model's in-sample ASCE is zero up to float error.
FitResult fit_hb(const ScoredDataset& calib, int m);

/// Linear scaling: expit(a + b * logit f), (a, b) minimizing in-sample MSE,
/// fit by damped Gauss-Newton from (0, 1).
FitResult fit_ls(const ScoredDataset& calib);

/// Group-conditional unbiased regression: f + sum_g lambda_g g(x) by least
/// squares (normal equations with 1e-10 ridge jitter). Exactly duplicated
/// design columns are dropped with a warning.
FitResult fit_gcur(const ScoredDataset& calib);

/// Logistic counterpart: expit(theta_0 * logit f + sum_g theta_g g(x)) by
/// Newton/IRLS on cross-entropy. Diverging coefficients (perfect separation)
/// trigger a ridge-regularized refit with a warning.
FitResult fit_gculr(const ScoredDataset& calib);

/// Iterative grouped histogram binning: patch the worst (level, group) bin
/// with its bias, re-round, repeat until max_g mass * gASCE <= alpha.
FitResult fit_ighb(const ScoredDataset& calib, FitConfig config);

/// Iterative grouped linear binning: upper/lower-set bins, logit-linear
/// patches, calibration/validation split with mass and validation-MSE
/// early stopping.
FitResult fit_iglb(const ScoredDataset& data, FitConfig config);

/// The shared iterative engine with every knob exposed; fit_ighb/fit_iglb are
/// the two canonical configurations, the remaining combinations are the
/// bin-shape/patch-shape ablations.
FitResult fit_iterative(const ScoredDataset& data, FitConfig config);

struct WorstBin {
    BinDescriptor bin;
    double bias = 0.0;
    double mass = 0.0;
    std::size_t count = 0;
};

/// Exhaustive scan of (level, group, comparator) maximizing mass * bias^2.
/// Ties prefer larger mass, then lower level, then lower group index, then
/// EQ < LE < GE. Scores must be on-grid.
WorstBin select_worst_bin(std::span<const double> scores, std::span<const int> labels,
                          const GroupMatrix& groups, const Grid& grid,
                          std::span<const Comparator> comparators);

/// Applies a fitted model to raw scores. Group columns are matched to the
/// model's group names by name; missing columns raise GroupSchemaMismatch.
std::vector<double> predict(const CalibratedModel& model, std::span<const double> raw_scores,
                            const GroupMatrix& groups);

}  // namespace calib
}  // namespace mcal
