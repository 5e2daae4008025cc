#include "mcal/calibrators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mcal/metrics.hpp"

namespace mcal {
namespace calib {

double expit(double t) noexcept {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double logit_clipped(double p) noexcept {
    const double q = std::min(std::max(p, kScoreClip), 1.0 - kScoreClip);
    return std::log(q / (1.0 - q));
}

int FitConfig::resolved_max_rounds() const {
    if (max_rounds > 0) return max_rounds;
    return static_cast<int>(std::ceil(4.0 / (alpha * alpha) - 1e-6));
}

void FitConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("FitConfig: alpha must be in (0,1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ConfigError("FitConfig: epsilon must be in [0,1]");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("FitConfig: val_fraction must be in (0,1)");
    if (comparators.empty()) throw ConfigError("FitConfig: comparator set is empty");
    if (max_rounds < 0) throw ConfigError("FitConfig: max_rounds must be >= 0");
}

namespace {

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

double apply_transform(const PatchTransform& tr, double s) {
    if (const auto* shift = std::get_if<ConstantShift>(&tr)) return s + shift->delta;
    const auto& ll = std::get<LogitLinear>(tr);
    return expit(ll.alpha + ll.beta * logit_clipped(s));
}

bool in_bin(double score, const BinDescriptor& bin) {
    switch (bin.cmp) {
        case Comparator::EQ: return score == bin.level;
        case Comparator::LE: return score <= bin.level;
        case Comparator::GE: return score >= bin.level;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Two-parameter logit-linear MSE minimizer (shared by LS and IGLB patches).
// ---------------------------------------------------------------------------

struct LsCore {
    double a = 0.0;
    double b = 1.0;
    double mse = 0.0;
    int iterations = 0;
    bool converged = false;
};

double ls_objective(double a, double b, std::span<const double> z, std::span<const int> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double e = expit(a + b * z[i]) - y[i];
        acc += e * e;
    }
    return acc / static_cast<double>(z.size());
}

LsCore ls_minimize(std::span<const double> z, std::span<const int> y) {
    const auto n = static_cast<double>(z.size());
    LsCore cur;
    cur.mse = ls_objective(cur.a, cur.b, z, y);

    // Exact-Hessian Newton with adaptive Tikhonov damping: every accepted
    // step decreases the objective, so the result never exceeds the identity
    // initialization.
    double damping = 1e-4;
    for (int iter = 0; iter < 500; ++iter) {
        cur.iterations = iter;
        double ga = 0.0, gb = 0.0;
        double haa = 0.0, hab = 0.0, hbb = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double p = expit(cur.a + cur.b * z[i]);
            const double w = p * (1.0 - p);
            const double e = p - y[i];
            ga += e * w;
            gb += e * w * z[i];
            const double h = w * w + e * w * (1.0 - 2.0 * p);
            haa += h;
            hab += h * z[i];
            hbb += h * z[i] * z[i];
        }
        const double scale = 2.0 / n;
        ga *= scale;
        gb *= scale;
        haa *= scale;
        hab *= scale;
        hbb *= scale;

        if (std::max(std::abs(ga), std::abs(gb)) < 1e-9) {
            cur.converged = true;
            return cur;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 60; ++attempt) {
            const double aa = haa + damping;
            const double bb = hbb + damping;
            const double det = aa * bb - hab * hab;
            double da, db;
            if (det > 0.0 && std::isfinite(det)) {
                da = -(bb * ga - hab * gb) / det;
                db = -(aa * gb - hab * ga) / det;
            } else {
                da = -ga / (1.0 + damping);
                db = -gb / (1.0 + damping);
            }
            if (!(ga * da + gb * db < 0.0)) {  // not descent: damp harder
                damping *= 4.0;
                continue;
            }
            const double cand = ls_objective(cur.a + da, cur.b + db, z, y);
            if (cand < cur.mse) {
                const double improvement = cur.mse - cand;
                cur.a += da;
                cur.b += db;
                cur.mse = cand;
                damping = std::max(damping / 3.0, 1e-12);
                accepted = true;
                if (improvement <= 1e-17 * (1.0 + cur.mse)) {
                    // flat to machine precision
                    cur.converged = std::max(std::abs(ga), std::abs(gb)) < 1e-6;
                    return cur;
                }
                break;
            }
            damping *= 4.0;
        }
        if (!accepted) {
            cur.converged = std::max(std::abs(ga), std::abs(gb)) < 1e-6;
            return cur;
        }
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Exact-duplicate design column detection for GCUR/GCULR. Columns are
// compared as the real vectors the regression sees.
// ---------------------------------------------------------------------------

// Returns indices of group columns that duplicate the score column or an
// earlier group column; duplicates get zero coefficients.
std::vector<std::size_t> duplicate_group_columns(std::span<const double> scores,
                                                 const GroupMatrix& groups) {
    const std::size_t n = scores.size();
    const std::size_t k = groups.group_count();
    auto equal_to_scores = [&](std::size_t col) {
        const auto g = groups.column(col);
        for (std::size_t i = 0; i < n; ++i)
            if (scores[i] != static_cast<double>(g[i])) return false;
        return true;
    };
    auto equal_cols = [&](std::size_t a, std::size_t b) {
        const auto ga = groups.column(a);
        const auto gb = groups.column(b);
        for (std::size_t i = 0; i < n; ++i)
            if (ga[i] != gb[i]) return false;
        return true;
    };
    std::vector<std::size_t> dropped;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < k; ++c) {
        bool dup = equal_to_scores(c);
        if (!dup)
            for (std::size_t prev : kept)
                if (equal_cols(prev, c)) {
                    dup = true;
                    break;
                }
        if (dup)
            dropped.push_back(c);
        else
            kept.push_back(c);
    }
    return dropped;
}

std::vector<std::size_t> retained_columns(std::size_t k, std::span<const std::size_t> dropped) {
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < k; ++c)
        if (std::find(dropped.begin(), dropped.end(), c) == dropped.end()) kept.push_back(c);
    return kept;
}

}  // namespace

// ---------------------------------------------------------------------------
// Histogram binning
// ---------------------------------------------------------------------------

FitResult fit_hb(const ScoredDataset& calib, int m) {
    Grid grid(m);
    const auto f = round_to_grid(calib.scores(), m);
    const auto labels = calib.labels();

    std::vector<std::size_t> count(static_cast<std::size_t>(m) + 1, 0);
    std::vector<double> sum_label(count.size(), 0.0);
    std::vector<double> sum_score(count.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = static_cast<std::size_t>(grid.round_index(f[i]));
        count[idx] += 1;
        sum_label[idx] += labels[i];
        sum_score[idx] += f[i];
    }

    FitResult result;
    result.trace.initial_mse = metrics::mse(f, labels);
    for (std::size_t i = 0; i < count.size(); ++i) {
        if (count[i] == 0) continue;
        const double delta = (sum_label[i] - sum_score[i]) / static_cast<double>(count[i]);
        result.model.patches.push_back(
            {BinDescriptor{grid.level(static_cast<int>(i)), Comparator::EQ, 0},
             ConstantShift{delta}});
    }
    result.model.m = m;
    result.model.method = Method::HB;
    // marginal: only the reserved column is referenced, so any valid group
    // matrix can be supplied at prediction time
    result.model.group_names = {kAllGroup};
    result.trace.stop_reason = "converged";
    return result;
}

// ---------------------------------------------------------------------------
// Linear scaling
// ---------------------------------------------------------------------------

FitResult fit_ls(const ScoredDataset& calib) {
    if (calib.size() < 2) throw DataError("fit_ls: need at least 2 rows");
    std::vector<double> z(calib.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = logit_clipped(calib.scores()[i]);

    const LsCore core = ls_minimize(z, calib.labels());

    FitResult result;
    result.model.m = 1;
    result.model.method = Method::LS;
    result.model.coefficients = {core.a, core.b};
    result.trace.iterations = core.iterations;
    result.trace.converged = core.converged;
    result.trace.initial_mse = metrics::mse(calib);
    result.trace.stop_reason = core.converged ? "converged" : "iteration_limit";
    if (!core.converged)
        result.trace.warnings.push_back("NoConvergence: gradient tolerance not reached; "
                                        "best iterate returned");
    return result;
}

// ---------------------------------------------------------------------------
// Group-conditional unbiased regression (least squares)
// ---------------------------------------------------------------------------

FitResult fit_gcur(const ScoredDataset& calib) {
    const std::size_t n = calib.size();
    const auto& groups = calib.groups();
    const std::size_t k = groups.group_count();

    FitResult result;
    const auto dropped = duplicate_group_columns(calib.scores(), groups);
    for (std::size_t c : dropped)
        result.trace.warnings.push_back("dropped duplicate design column for group '" +
                                        groups.name(c) + "'");
    std::vector<std::size_t> empty_groups;
    for (std::size_t c = 0; c < k; ++c)
        if (groups.count(c) == 0) {
            empty_groups.push_back(c);
            result.trace.warnings.push_back("EmptyGroup: '" + groups.name(c) +
                                            "' skipped in regression");
        }
    auto kept = retained_columns(k, dropped);
    kept.erase(std::remove_if(kept.begin(), kept.end(),
                              [&](std::size_t c) { return groups.count(c) == 0; }),
               kept.end());
    if (kept.empty()) throw DataError("fit_gcur: no usable group columns");

    Eigen::MatrixXd design(n, kept.size());
    Eigen::VectorXd residual(n);
    for (std::size_t i = 0; i < n; ++i)
        residual(static_cast<Eigen::Index>(i)) = calib.labels()[i] - calib.scores()[i];
    for (std::size_t j = 0; j < kept.size(); ++j) {
        const auto col = groups.column(kept[j]);
        for (std::size_t i = 0; i < n; ++i)
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }

    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().array() += 1e-10;
    const Eigen::VectorXd rhs = design.transpose() * residual;
    const Eigen::VectorXd lambda = normal.ldlt().solve(rhs);
    if (!lambda.allFinite()) throw NumericError("RankDeficient: normal equations unsolvable");

    result.model.m = 1;
    result.model.method = Method::GCUR;
    result.model.group_names = groups.names();
    result.model.coefficients.assign(k, 0.0);
    for (std::size_t j = 0; j < kept.size(); ++j)
        result.model.coefficients[kept[j]] = lambda(static_cast<Eigen::Index>(j));

    // In-sample clip rate of f + G*lambda.
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = calib.scores()[i];
        for (std::size_t j = 0; j < kept.size(); ++j)
            v += result.model.coefficients[kept[j]] * groups.column(kept[j])[i];
        if (v < 0.0 || v > 1.0) ++clipped;
    }
    result.trace.clip_rate = static_cast<double>(clipped) / static_cast<double>(n);
    result.trace.initial_mse = metrics::mse(calib);
    result.trace.stop_reason = "converged";
    return result;
}

// ---------------------------------------------------------------------------
// Group-conditional unbiased logistic regression (Newton / IRLS)
// ---------------------------------------------------------------------------

namespace {

struct GculrProblem {
    Eigen::MatrixXd x;          // n x (1 + R): logit score, then retained groups
    Eigen::VectorXd y;
    std::vector<double> group_count;  // per retained column
};

double gculr_nll(const GculrProblem& prob, const Eigen::VectorXd& theta, double ridge) {
    const Eigen::VectorXd eta = prob.x * theta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double p = std::min(1.0 - 1e-12, std::max(1e-12, expit(eta(i))));
        acc += prob.y(i) > 0.5 ? -std::log(p) : -std::log(1.0 - p);
    }
    acc /= static_cast<double>(eta.size());
    if (ridge > 0.0) acc += 0.5 * ridge * theta.squaredNorm();
    return acc;
}

struct GculrSolution {
    Eigen::VectorXd theta;
    int iterations = 0;
    bool converged = false;
    bool separated = false;
};

GculrSolution gculr_newton(const GculrProblem& prob, double ridge, bool detect_separation) {
    const auto n = static_cast<double>(prob.x.rows());
    const Eigen::Index dim = prob.x.cols();
    GculrSolution sol;
    sol.theta = Eigen::VectorXd::Zero(dim);
    sol.theta(0) = 1.0;  // identity-mapping start
    double nll = gculr_nll(prob, sol.theta, ridge);

    for (int iter = 0; iter < 200; ++iter) {
        sol.iterations = iter;
        const Eigen::VectorXd eta = prob.x * sol.theta;
        Eigen::VectorXd p(eta.size());
        Eigen::VectorXd w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            p(i) = expit(eta(i));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
        }
        Eigen::VectorXd grad = prob.x.transpose() * (p - prob.y) / n;
        if (ridge > 0.0) grad += ridge * sol.theta;

        // Convergence demands both a small gradient and small per-group
        // residual means; the latter is the contract this fit must satisfy.
        double max_group_resid = 0.0;
        for (Eigen::Index j = 1; j < dim; ++j) {
            const double col_sum = grad(j) * n - (ridge > 0.0 ? ridge * sol.theta(j) * n : 0.0);
            max_group_resid = std::max(
                max_group_resid, std::abs(col_sum / prob.group_count[static_cast<std::size_t>(j - 1)]));
        }
        if (grad.lpNorm<Eigen::Infinity>() < 1e-8 && max_group_resid < 1e-7) {
            sol.converged = true;
            return sol;
        }

        Eigen::MatrixXd hess = prob.x.transpose() * w.asDiagonal() * prob.x / n;
        hess.diagonal().array() += 1e-12 + ridge;
        Eigen::VectorXd step = hess.ldlt().solve(-grad);
        if (!step.allFinite()) step = -grad;
        double slope = grad.dot(step);
        if (!(slope < 0.0)) {
            step = -grad;
            slope = -grad.squaredNorm();
        }

        double t = 1.0;
        bool stepped = false;
        while (t >= 1e-14) {
            const Eigen::VectorXd cand = sol.theta + t * step;
            const double cand_nll = gculr_nll(prob, cand, ridge);
            if (cand_nll <= nll + 1e-4 * t * slope) {
                sol.theta = cand;
                nll = cand_nll;
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if (!stepped) return sol;
        if (detect_separation && sol.theta.norm() > 30.0) {
            sol.separated = true;
            return sol;
        }
    }
    return sol;
}

}  // namespace

FitResult fit_gculr(const ScoredDataset& calib) {
    const std::size_t n = calib.size();
    const auto& groups = calib.groups();
    const std::size_t k = groups.group_count();

    FitResult result;
    const auto dropped = duplicate_group_columns(calib.scores(), groups);
    for (std::size_t c : dropped)
        result.trace.warnings.push_back("dropped duplicate design column for group '" +
                                        groups.name(c) + "'");
    auto kept = retained_columns(k, dropped);
    kept.erase(std::remove_if(kept.begin(), kept.end(),
                              [&](std::size_t c) { return groups.count(c) == 0; }),
               kept.end());
    if (kept.empty()) throw DataError("fit_gculr: no usable group columns");

    GculrProblem prob;
    prob.x.resize(n, static_cast<Eigen::Index>(1 + kept.size()));
    prob.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        prob.x(static_cast<Eigen::Index>(i), 0) = logit_clipped(calib.scores()[i]);
        prob.y(static_cast<Eigen::Index>(i)) = calib.labels()[i];
    }
    for (std::size_t j = 0; j < kept.size(); ++j) {
        const auto col = groups.column(kept[j]);
        for (std::size_t i = 0; i < n; ++i)
            prob.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = col[i];
        prob.group_count.push_back(static_cast<double>(groups.count(kept[j])));
    }

    GculrSolution sol = gculr_newton(prob, 0.0, true);
    if (sol.separated) {
        result.trace.warnings.push_back(
            "PerfectSeparation: coefficients diverged; refit with ridge 1e-4");
        sol = gculr_newton(prob, 1e-4, false);
    }
    if (!sol.converged)
        result.trace.warnings.push_back("NoConvergence: gradient tolerance not reached; "
                                        "best iterate returned");

    result.model.m = 1;
    result.model.method = Method::GCULR;
    result.model.group_names = groups.names();
    result.model.coefficients.assign(1 + k, 0.0);
    result.model.coefficients[0] = sol.theta(0);
    for (std::size_t j = 0; j < kept.size(); ++j)
        result.model.coefficients[1 + kept[j]] = sol.theta(static_cast<Eigen::Index>(j + 1));
    result.trace.iterations = sol.iterations;
    result.trace.converged = sol.converged;
    result.trace.initial_mse = metrics::mse(calib);
    result.trace.stop_reason = sol.converged ? "converged" : "iteration_limit";
    return result;
}

// ---------------------------------------------------------------------------
// Worst-bin search
// ---------------------------------------------------------------------------

WorstBin select_worst_bin(std::span<const double> scores, std::span<const int> labels,
                          const GroupMatrix& groups, const Grid& grid,
                          std::span<const Comparator> comparators) {
    if (comparators.empty()) throw ConfigError("select_worst_bin: no comparators");
    const std::size_t n = scores.size();
    const auto levels = static_cast<std::size_t>(grid.m()) + 1;

    const bool want_eq =
        std::find(comparators.begin(), comparators.end(), Comparator::EQ) != comparators.end();
    const bool want_le =
        std::find(comparators.begin(), comparators.end(), Comparator::LE) != comparators.end();
    const bool want_ge =
        std::find(comparators.begin(), comparators.end(), Comparator::GE) != comparators.end();

    struct Candidate {
        double objective = -1.0;
        WorstBin wb;
    };
    Candidate best;

    auto consider = [&](double level, Comparator cmp, std::size_t group, std::size_t count,
                        double sum_label, double sum_score) {
        if (count == 0) return;
        const double mass = static_cast<double>(count) / static_cast<double>(n);
        const double bias = (sum_label - sum_score) / static_cast<double>(count);
        const double objective = mass * bias * bias;
        const auto cmp_rank = static_cast<int>(cmp);
        bool better = false;
        if (objective > best.objective) {
            better = true;
        } else if (objective == best.objective) {
            if (mass > best.wb.mass) better = true;
            else if (mass == best.wb.mass) {
                if (level < best.wb.bin.level) better = true;
                else if (level == best.wb.bin.level) {
                    if (group < best.wb.bin.group_index) better = true;
                    else if (group == best.wb.bin.group_index &&
                             cmp_rank < static_cast<int>(best.wb.bin.cmp))
                        better = true;
                }
            }
        }
        if (better) {
            best.objective = objective;
            best.wb = {BinDescriptor{level, cmp, group}, bias, mass, count};
        }
    };

    std::vector<std::size_t> count(levels);
    std::vector<double> sum_label(levels);
    std::vector<double> sum_score(levels);
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        const auto col = groups.column(g);
        std::fill(count.begin(), count.end(), 0);
        std::fill(sum_label.begin(), sum_label.end(), 0.0);
        std::fill(sum_score.begin(), sum_score.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!col[i]) continue;
            const auto idx = static_cast<std::size_t>(grid.round_index(scores[i]));
            count[idx] += 1;
            sum_label[idx] += labels[i];
            sum_score[idx] += scores[i];
        }
        if (want_eq)
            for (std::size_t i = 0; i < levels; ++i)
                consider(grid.level(static_cast<int>(i)), Comparator::EQ, g, count[i],
                         sum_label[i], sum_score[i]);
        if (want_le) {
            std::size_t c = 0;
            double sl = 0.0, ss = 0.0;
            for (std::size_t i = 0; i < levels; ++i) {
                c += count[i];
                sl += sum_label[i];
                ss += sum_score[i];
                consider(grid.level(static_cast<int>(i)), Comparator::LE, g, c, sl, ss);
            }
        }
        if (want_ge) {
            std::size_t c = 0;
            double sl = 0.0, ss = 0.0;
            for (std::size_t i = levels; i-- > 0;) {
                c += count[i];
                sl += sum_label[i];
                ss += sum_score[i];
                consider(grid.level(static_cast<int>(i)), Comparator::GE, g, c, sl, ss);
            }
        }
    }
    if (best.objective < 0.0) throw DataError("NoCandidateBins");
    return best.wb;
}

// ---------------------------------------------------------------------------
// Iterative engine (IGHB, IGLB, and their bin/patch ablations)
// ---------------------------------------------------------------------------

namespace {

// Applies the transform to rows matching the bin and re-rounds them.
void apply_patch(std::vector<double>& scores, const GroupMatrix& groups, std::size_t group_col,
                 const BinDescriptor& bin, const PatchTransform& tr, const Grid& grid) {
    const auto col = groups.column(group_col);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!col[i] || !in_bin(scores[i], bin)) continue;
        scores[i] = grid.round(apply_transform(tr, scores[i]));
    }
}

PatchTransform make_transform(const FitConfig& config, const WorstBin& wb,
                              std::span<const double> scores, std::span<const int> labels,
                              const GroupMatrix& groups) {
    if (config.transform == PatchKind::ConstantShift) return ConstantShift{wb.bias};

    std::vector<double> z;
    std::vector<int> y;
    const auto col = groups.column(wb.bin.group_index);
    z.reserve(wb.count);
    y.reserve(wb.count);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!col[i] || !in_bin(scores[i], wb.bin)) continue;
        z.push_back(logit_clipped(scores[i]));
        y.push_back(labels[i]);
    }
    const bool single_class =
        std::all_of(y.begin(), y.end(), [](int v) { return v == 0; }) ||
        std::all_of(y.begin(), y.end(), [](int v) { return v == 1; });
    const bool constant_score =
        std::all_of(z.begin(), z.end(), [&](double v) { return v == z.front(); });
    if (z.size() < kMinLogitFitRows || single_class || constant_score)
        return ConstantShift{wb.bias};
    const LsCore core = ls_minimize(z, y);
    return LogitLinear{core.a, core.b};
}

}  // namespace

FitResult fit_iterative(const ScoredDataset& data, FitConfig config) {
    if (config.comparators.empty())
        config.comparators = config.early_stopping
                                 ? std::vector<Comparator>{Comparator::LE, Comparator::GE}
                                 : std::vector<Comparator>{Comparator::EQ};
    config.validate();
    const Grid grid = Grid::for_alpha(config.alpha);

    std::optional<std::pair<ScoredDataset, ScoredDataset>> parts;
    const ScoredDataset* cal = &data;
    const ScoredDataset* val = nullptr;
    if (config.early_stopping) {
        parts = split(data, 1.0 - config.val_fraction, config.seed);
        cal = &parts->first;
        val = &parts->second;
    }

    auto f_cal = round_to_grid(cal->scores(), grid.m());
    std::vector<double> f_val;
    if (val) f_val = round_to_grid(val->scores(), grid.m());

    FitResult result;
    FitTrace& trace = result.trace;
    for (std::size_t g = 0; g < cal->groups().group_count(); ++g)
        if (cal->groups().count(g) == 0)
            trace.warnings.push_back("EmptyGroup: '" + cal->groups().name(g) +
                                     "' excluded from bin selection");

    double cur_mse = metrics::mse(f_cal, cal->labels());
    trace.initial_mse = cur_mse;
    double cur_val_mse = 0.0;
    if (val) {
        cur_val_mse = metrics::mse(f_val, val->labels());
        trace.initial_val_mse = cur_val_mse;
    }

    // The exact-bin constant-shift configuration carries the per-round MSE
    // decrease and bounded-round guarantees; violations there are bug
    // signals, not data conditions.
    const bool strict = !config.early_stopping &&
                        config.transform == PatchKind::ConstantShift &&
                        config.comparators == std::vector<Comparator>{Comparator::EQ};

    const int cap = config.resolved_max_rounds();
    int round = 0;
    std::string stop;
    while (true) {
        if (!config.early_stopping) {
            const auto [violation, worst_group] =
                metrics::violation_on_grid(f_cal, cal->labels(), cal->groups(), grid);
            (void)worst_group;
            if (violation <= config.alpha) {
                stop = "converged";
                break;
            }
        }
        if (round >= cap) {
            if (strict)
                throw NumericError("RoundLimitExceeded: IGHB failed to converge within "
                                   "4/alpha^2 rounds");
            stop = "round_limit";
            break;
        }

        const WorstBin wb =
            select_worst_bin(f_cal, cal->labels(), cal->groups(), grid, config.comparators);
        if (config.early_stopping && wb.mass < config.epsilon) {
            stop = "small_bin";
            break;
        }

        const PatchTransform tr =
            make_transform(config, wb, f_cal, cal->labels(), cal->groups());

        std::vector<double> cal_next = f_cal;
        apply_patch(cal_next, cal->groups(), wb.bin.group_index, wb.bin, tr, grid);
        const double mse_next = metrics::mse(cal_next, cal->labels());

        std::optional<double> val_mse_next;
        std::vector<double> val_next;
        if (val) {
            val_next = f_val;
            apply_patch(val_next, val->groups(), wb.bin.group_index, wb.bin, tr, grid);
            val_mse_next = metrics::mse(val_next, val->labels());
            if (*val_mse_next >= cur_val_mse) {
                stop = "validation_stop";
                break;
            }
        }
        if (strict && mse_next > cur_mse + 1e-10)
            throw NumericError("IGHB round " + std::to_string(round) +
                               " increased in-sample MSE");

        f_cal = std::move(cal_next);
        cur_mse = mse_next;
        if (val) {
            f_val = std::move(val_next);
            cur_val_mse = *val_mse_next;
        }
        result.model.patches.push_back({wb.bin, tr});
        trace.rounds.push_back({round, wb.bin, wb.mass, wb.bias, tr, cur_mse, val_mse_next});
        ++round;
    }

    trace.stop_reason = stop;
    result.model.m = grid.m();
    result.model.method = config.early_stopping ? Method::IGLB : Method::IGHB;
    result.model.group_names = cal->groups().names();
    return result;
}

FitResult fit_ighb(const ScoredDataset& calib, FitConfig config) {
    if (config.comparators.empty()) config.comparators = {Comparator::EQ};
    if (config.comparators != std::vector<Comparator>{Comparator::EQ})
        throw ConfigError("fit_ighb: comparators must be {EQ}");
    config.transform = PatchKind::ConstantShift;
    config.early_stopping = false;
    return fit_iterative(calib, std::move(config));
}

FitResult fit_iglb(const ScoredDataset& data, FitConfig config) {
    if (config.comparators.empty()) config.comparators = {Comparator::LE, Comparator::GE};
    for (Comparator c : config.comparators)
        if (c == Comparator::EQ)
            throw ConfigError("fit_iglb: comparators must be a subset of {LE, GE}");
    if (!(config.epsilon > 0.0)) throw ConfigError("fit_iglb: epsilon must be > 0");
    config.transform = PatchKind::LogitLinear;
    config.early_stopping = true;
    return fit_iterative(data, std::move(config));
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

std::vector<double> predict(const CalibratedModel& model, std::span<const double> raw_scores,
                            const GroupMatrix& groups) {
    model.validate();
    if (groups.rows() != raw_scores.size())
        throw DataError("predict: group rows != score rows");

    // Patches and coefficients address groups by fit-time position; resolve
    // those positions against the caller's columns by name.
    std::vector<std::size_t> group_map(model.group_names.size());
    for (std::size_t k = 0; k < model.group_names.size(); ++k) {
        const auto idx = groups.index_of(model.group_names[k]);
        if (!idx)
            throw DataError("GroupSchemaMismatch: missing group '" + model.group_names[k] + "'");
        group_map[k] = *idx;
    }

    const std::size_t n = raw_scores.size();
    std::vector<double> out(n);
    const Grid grid(model.m);

    switch (model.method) {
        case Method::HB: {
            // Level sets are disjoint: patches apply simultaneously on the
            // rounded value, with no re-rounding (that is what makes the
            // fitted model exactly calibrated in-sample).
            for (std::size_t i = 0; i < n; ++i) out[i] = grid.round(raw_scores[i]);
            std::vector<double> rounded = out;
            for (const auto& patch : model.patches) {
                const auto col = groups.column(group_map[patch.bin.group_index]);
                for (std::size_t i = 0; i < n; ++i)
                    if (col[i] && in_bin(rounded[i], patch.bin))
                        out[i] = clip01(apply_transform(patch.transform, rounded[i]));
            }
            return out;
        }
        case Method::IGHB:
        case Method::IGLB: {
            for (std::size_t i = 0; i < n; ++i) out[i] = grid.round(raw_scores[i]);
            for (const auto& patch : model.patches) {
                const auto col = groups.column(group_map[patch.bin.group_index]);
                for (std::size_t i = 0; i < n; ++i)
                    if (col[i] && in_bin(out[i], patch.bin))
                        out[i] = grid.round(apply_transform(patch.transform, out[i]));
            }
            return out;
        }
        case Method::LS: {
            const double a = model.coefficients.at(0);
            const double b = model.coefficients.at(1);
            for (std::size_t i = 0; i < n; ++i)
                out[i] = expit(a + b * logit_clipped(raw_scores[i]));
            return out;
        }
        case Method::GCUR: {
            for (std::size_t i = 0; i < n; ++i) {
                double v = raw_scores[i];
                for (std::size_t k = 0; k < model.group_names.size(); ++k) {
                    const double lam = model.coefficients.at(k);
                    if (lam != 0.0 && groups.column(group_map[k])[i]) v += lam;
                }
                out[i] = clip01(v);
            }
            return out;
        }
        case Method::GCULR: {
            for (std::size_t i = 0; i < n; ++i) {
                double eta = model.coefficients.at(0) * logit_clipped(raw_scores[i]);
                for (std::size_t k = 0; k < model.group_names.size(); ++k) {
                    const double th = model.coefficients.at(1 + k);
                    if (th != 0.0 && groups.column(group_map[k])[i]) eta += th;
                }
                out[i] = expit(eta);
            }
            return out;
        }
    }
    throw NumericError("predict: unknown method");
}

}  // namespace calib
}  // namespace mcal
