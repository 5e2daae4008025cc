#include "mcal/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "mcal/calibrators.hpp"
#include "mcal/rng.hpp"

namespace mcal {
namespace synth {

namespace {

constexpr double kProbFloor = 1e-12;

double safe_logit(double p) {
    const double q = std::min(1.0 - kProbFloor, std::max(kProbFloor, p));
    return std::log(q / (1.0 - q));
}

}  // namespace

double TrueProbSpec::value(std::uint64_t mask, std::size_t k) const {
    if (kind == TrueProbKind::Table) {
        const auto it = table.find(mask);
        if (it == table.end())
            throw DataError("UnreachableSignature: no table entry for signature mask " +
                            std::to_string(mask));
        return it->second;
    }
    double eta = base_logit;
    for (std::size_t g = 0; g < k; ++g)
        if (mask >> g & 1) eta += weights.at(g);
    return calib::expit(eta);
}

double MiscalSpec::apply(double p_true, std::uint64_t mask) const {
    switch (kind) {
        case MiscalKind::Identity: return p_true;
        case MiscalKind::LogitShift: {
            double eta = safe_logit(p_true);
            for (std::size_t g = 0; g < deltas.size(); ++g)
                if (mask >> g & 1) eta += deltas[g];
            return calib::expit(eta);
        }
        case MiscalKind::LogitScale: return calib::expit(gamma * safe_logit(p_true));
        case MiscalKind::Noise:
            throw ConfigError("MiscalSpec::apply: Noise is not a deterministic transform");
    }
    return p_true;
}

void SyntheticSpec::validate() const {
    if (n == 0) throw ConfigError("SyntheticSpec: n must be >= 1");
    if (groups.empty()) throw ConfigError("SyntheticSpec: need at least one group");
    if (groups.size() > 20)
        throw ConfigError("SyntheticSpec: more than 20 groups makes the signature space "
                          "non-enumerable");
    double total = 0.0;
    for (const auto& g : groups) {
        if (g.name.empty() || g.name == kAllGroup)
            throw ConfigError("SyntheticSpec: invalid group name '" + g.name + "'");
        if (!(g.rate >= 0.0 && g.rate <= 1.0))
            throw ConfigError("SyntheticSpec: rate for '" + g.name + "' out of [0,1]");
        total += g.rate;
    }
    if (group_model == GroupModel::Partition && std::abs(total - 1.0) > 1e-9)
        throw ConfigError("SyntheticSpec: partition weights must sum to 1");
    if (true_prob.kind == TrueProbKind::Logistic && true_prob.weights.size() != groups.size())
        throw ConfigError("SyntheticSpec: logistic weights size != group count");
    if (miscal.kind == MiscalKind::LogitShift && miscal.deltas.size() != groups.size())
        throw ConfigError("SyntheticSpec: logit-shift deltas size != group count");
    if (miscal.kind == MiscalKind::Noise && !(miscal.sigma >= 0.0))
        throw ConfigError("SyntheticSpec: noise sigma must be >= 0");

    // The table must cover every reachable signature up front.
    for (const auto& sig : enumerate_signatures(*this)) {
        const double p = true_prob.value(sig.mask, groups.size());
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError("SyntheticSpec: true probability out of [0,1] for mask " +
                              std::to_string(sig.mask));
    }
}

std::vector<SignatureInfo> enumerate_signatures(const SyntheticSpec& spec) {
    const std::size_t k = spec.groups.size();
    std::vector<SignatureInfo> out;
    if (spec.group_model == GroupModel::Partition) {
        for (std::size_t g = 0; g < k; ++g) {
            if (spec.groups[g].rate <= 0.0) continue;
            SignatureInfo info;
            info.mask = std::uint64_t{1} << g;
            info.weight = spec.groups[g].rate;
            out.push_back(info);
        }
    } else {
        const std::uint64_t total = std::uint64_t{1} << k;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double w = 1.0;
            for (std::size_t g = 0; g < k; ++g) {
                const double r = spec.groups[g].rate;
                w *= (mask >> g & 1) ? r : 1.0 - r;
            }
            if (w <= 0.0) continue;
            SignatureInfo info;
            info.mask = mask;
            info.weight = w;
            out.push_back(info);
        }
    }
    for (auto& info : out) {
        info.p_true = spec.true_prob.value(info.mask, k);
        info.score =
            spec.miscal.deterministic() ? spec.miscal.apply(info.p_true, info.mask) : info.p_true;
    }
    return out;
}

GeneratedData generate(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t k = spec.groups.size();
    Rng rng(spec.seed);

    std::vector<double> scores(spec.n);
    std::vector<int> labels(spec.n);
    std::vector<std::vector<std::uint8_t>> columns(k, std::vector<std::uint8_t>(spec.n, 0));

    for (std::size_t i = 0; i < spec.n; ++i) {
        std::uint64_t mask = 0;
        if (spec.group_model == GroupModel::Partition) {
            const double u = rng.uniform01();
            double run = 0.0;
            std::size_t block = k - 1;
            for (std::size_t g = 0; g < k; ++g) {
                run += spec.groups[g].rate;
                if (u < run) {
                    block = g;
                    break;
                }
            }
            mask = std::uint64_t{1} << block;
        } else {
            for (std::size_t g = 0; g < k; ++g)
                if (rng.bernoulli(spec.groups[g].rate)) mask |= std::uint64_t{1} << g;
        }
        for (std::size_t g = 0; g < k; ++g) columns[g][i] = (mask >> g & 1) ? 1 : 0;

        const double p = spec.true_prob.value(mask, k);
        labels[i] = rng.bernoulli(p) ? 1 : 0;
        double s = spec.miscal.deterministic() ? spec.miscal.apply(p, mask)
                                               : p + spec.miscal.sigma * rng.normal();
        scores[i] = std::min(1.0, std::max(0.0, s));
    }

    std::vector<std::string> names;
    names.reserve(k);
    for (const auto& g : spec.groups) names.push_back(g.name);
    auto groups = GroupMatrix::with_all_column(spec.n, std::move(columns), std::move(names));

    GeneratedData out{ScoredDataset(std::move(scores), std::move(labels), std::move(groups)),
                      enumerate_signatures(spec), std::string(Rng::kAlgorithm)};
    return out;
}

PopulationMetrics population_metrics(const SyntheticSpec& spec, std::optional<int> grid_m) {
    spec.validate();
    if (!spec.miscal.deterministic())
        throw ConfigError("population_metrics: noise miscalibration has no finite level sets");

    auto sigs = enumerate_signatures(spec);
    if (grid_m) {
        const Grid grid(*grid_m);
        for (auto& s : sigs) s.score = grid.round(s.score);
    }

    const std::size_t k = spec.groups.size();
    PopulationMetrics out;

    // mse = sum_sig w * E[(Y - s)^2 | sig]
    for (const auto& s : sigs)
        out.mse += s.weight *
                   (s.p_true * (1.0 - s.score) * (1.0 - s.score) +
                    (1.0 - s.p_true) * s.score * s.score);

    // Level-set metrics conditioned on a membership bit (bit k == ALL).
    auto gasce_for = [&](std::optional<std::size_t> bit) {
        std::map<double, std::pair<double, double>> levels;  // score -> (weight, weight*p)
        double total = 0.0;
        for (const auto& s : sigs) {
            if (bit && !(s.mask >> *bit & 1)) continue;
            auto& [w, wp] = levels[s.score];
            w += s.weight;
            wp += s.weight * s.p_true;
            total += s.weight;
        }
        if (total <= 0.0) return std::pair<double, double>{0.0, 0.0};
        double acc = 0.0;
        for (const auto& [score, agg] : levels) {
            const double b = agg.second / agg.first - score;
            acc += agg.first / total * b * b;
        }
        return std::pair<double, double>{acc, total};
    };

    const auto [marginal, total_mass] = gasce_for(std::nullopt);
    (void)total_mass;
    out.asce = marginal;
    out.gasce.emplace_back(kAllGroup, marginal);
    out.max_violation = marginal;
    out.worst_group = kAllGroup;
    for (std::size_t g = 0; g < k; ++g) {
        const auto [value, mass] = gasce_for(g);
        out.gasce.emplace_back(spec.groups[g].name, value);
        if (mass * value > out.max_violation) {
            out.max_violation = mass * value;
            out.worst_group = spec.groups[g].name;
        }
    }
    return out;
}

}  // namespace synth
}  // namespace mcal
