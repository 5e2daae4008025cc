#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcal/data_model.hpp"

namespace mcal {
namespace synth {

enum class GroupModel { Bernoulli, Partition };

struct GroupSpec {
    std::string name;
    double rate = 0.0;  // Bernoulli membership rate, or partition block weight
};

enum class TrueProbKind { Table, Logistic };

/// Ground-truth P(Y=1 | signature). Either an explicit table over signature
/// bitmasks (bit g set = member of group g) or a logistic form expanded on
/// demand: expit(base_logit + sum_g weight_g * bit_g).
struct TrueProbSpec {
    TrueProbKind kind = TrueProbKind::Logistic;
    std::map<std::uint64_t, double> table;
    double base_logit = 0.0;
    std::vector<double> weights;

    double value(std::uint64_t mask, std::size_t k) const;
};

enum class MiscalKind { Identity, LogitShift, LogitScale, Noise };

/// Transform from the true probability to the reported raw score.
struct MiscalSpec {
    MiscalKind kind = MiscalKind::Identity;
    std::vector<double> deltas;  // LogitShift: per-group logit offsets
    double gamma = 1.0;          // LogitScale
    double sigma = 0.0;          // Noise: additive, truncated to [0,1]

    bool deterministic() const noexcept { return kind != MiscalKind::Noise; }
    double apply(double p_true, std::uint64_t mask) const;  // deterministic kinds only
};

struct SyntheticSpec {
    GroupModel group_model = GroupModel::Bernoulli;
    std::vector<GroupSpec> groups;
    TrueProbSpec true_prob;
    MiscalSpec miscal;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SignatureInfo {
    std::uint64_t mask = 0;
    double weight = 0.0;  // population probability of the signature
    double p_true = 0.0;
    double score = 0.0;  // deterministic miscal value; p_true for Noise
};

struct GeneratedData {
    ScoredDataset dataset;
    std::vector<SignatureInfo> truth;
    std::string rng_algorithm;
};

/// Deterministic for a fixed spec+seed. Labels ~ Bernoulli(p_true); scores
/// are the miscalibration transform of p_true, clipped to [0,1].
GeneratedData generate(const SyntheticSpec& spec);

/// All reachable signatures with their population weights.
std::vector<SignatureInfo> enumerate_signatures(const SyntheticSpec& spec);

struct PopulationMetrics {
    double asce = 0.0;
    double mse = 0.0;
    std::vector<std::pair<std::string, double>> gasce;  // per group, ALL first
    double max_violation = 0.0;
    std::string worst_group;
};

/// Exact population quantities by signature enumeration. Requires a
/// deterministic miscalibration; pass grid_m to measure the rounded score.
PopulationMetrics population_metrics(const SyntheticSpec& spec,
                                     std::optional<int> grid_m = std::nullopt);

}  // namespace synth
}  // namespace mcal
