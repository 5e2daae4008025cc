// mcal: post-hoc calibration and multicalibration of confidence scores.
//
// Subcommands: score, group, synth, calibrate, evaluate, bench.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>

#include "mcal/calibrators.hpp"
#include "mcal/data_model.hpp"
#include "mcal/grouping.hpp"
#include "mcal/io.hpp"
#include "mcal/metrics.hpp"
#include "mcal/rng.hpp"
#include "mcal/scoring.hpp"
#include "mcal/synthetic.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

using namespace mcal;

struct ManifestBuilder {
    io::RunManifest manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit ManifestBuilder(int argc, char** argv) {
        manifest.tool_version = kToolVersion;
        for (int i = 0; i < argc; ++i) {
            if (i) manifest.command += ' ';
            manifest.command += argv[i];
        }
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::tm tm{};
        gmtime_r(&tt, &tm);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        manifest.started_utc = buf;
    }

    void config(const std::string& key, const std::string& value) {
        manifest.config.emplace_back(key, value);
    }
    void input(const std::filesystem::path& path) {
        manifest.inputs.emplace_back(path.string(), io::file_digest(path));
    }
    void seed(std::uint64_t s) { manifest.seed = s; }

    void emit(const std::filesystem::path& output) {
        manifest.elapsed_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
        io::write_manifest(output, manifest);
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// --- score -------------------------------------------------------------------

int cmd_score(const std::string& kind, const std::filesystem::path& in,
              const std::filesystem::path& out, ManifestBuilder& mb) {
    const auto rows = io::read_ragged_csv(in);
    std::vector<double> scores;
    scores.reserve(rows.size());
    std::size_t line_no = 0;
    for (const auto& row : rows) {
        ++line_no;
        const std::string ctx = "line " + std::to_string(line_no);
        if (kind == "tf") {
            if (row.size() != 2)
                throw DataError("ParseError(" + ctx + "): tf rows need exactly 2 logits");
            scores.push_back(true_false_score(row[0], row[1]));
        } else if (kind == "ppl") {
            if (row.size() < 2)
                throw DataError("ParseError(" + ctx + "): ppl rows are T0,lp_1,...,lp_T");
            SequenceLogProbs seq;
            const double t0 = row[0];
            if (t0 < 0.0 || t0 != std::floor(t0))
                throw DataError("ParseError(" + ctx + "): prompt length must be a "
                                "nonnegative integer");
            seq.prompt_len = static_cast<std::size_t>(t0);
            seq.logprobs.assign(row.begin() + 1, row.end());
            scores.push_back(inverse_perplexity_score(seq));
        } else {  // mc
            scores.push_back(multiple_choice_score(row));
        }
    }
    io::write_scores_csv(out, scores);
    mb.emit(out);
    std::cout << "wrote " << out.string() << " (" << scores.size() << " scores)\n";
    return 0;
}

// --- group -------------------------------------------------------------------

int cmd_group(const std::string& annotations, const std::string& features_path,
              std::size_t kmeans, std::uint64_t seed, bool have_seed,
              const std::vector<std::string>& rule_specs, const std::filesystem::path& out,
              ManifestBuilder& mb) {
    grouping::GroupingResult result{GroupMatrix::all_only(1), {}};
    if (!annotations.empty()) {
        std::ifstream in(annotations);
        if (!in) throw DataError("cannot open '" + annotations + "'");
        std::string header;
        if (!std::getline(in, header)) throw DataError("ParseError(line 1): empty file");
        std::vector<std::string> names;
        {
            std::string cur;
            for (char c : header) {
                if (c == ',') {
                    names.push_back(cur);
                    cur.clear();
                } else if (c != '\r') {
                    cur.push_back(c);
                }
            }
            names.push_back(cur);
        }
        std::vector<std::vector<std::uint8_t>> columns(names.size());
        std::string line;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::size_t c = 0;
            std::string cur;
            auto push = [&](const std::string& cell) {
                if (c >= names.size())
                    throw DataError("ParseError(line " + std::to_string(line_no) +
                                    "): too many cells");
                if (cell != "0" && cell != "1")
                    throw DataError("ParseError(line " + std::to_string(line_no) +
                                    "): annotation cells must be 0/1");
                columns[c++].push_back(cell == "1" ? 1 : 0);
            };
            for (char ch : line) {
                if (ch == ',') {
                    push(cur);
                    cur.clear();
                } else if (ch != '\r') {
                    cur.push_back(ch);
                }
            }
            push(cur);
            if (c != names.size())
                throw DataError("ParseError(line " + std::to_string(line_no) +
                                "): too few cells");
        }
        const std::size_t n = columns.empty() ? 0 : columns[0].size();
        mb.input(annotations);
        result = grouping::groups_from_annotations(n, std::move(columns), std::move(names));
    } else if (kmeans > 0) {
        if (!have_seed) throw ConfigError("--kmeans requires --seed");
        auto features = io::read_features_csv(features_path);
        mb.input(features_path);
        result = grouping::cluster_groups(features, kmeans, seed);
    } else if (!rule_specs.empty()) {
        auto features = io::read_features_csv(features_path);
        mb.input(features_path);
        std::vector<grouping::ThresholdRule> rules;
        for (const auto& spec : rule_specs) {
            // col,op,cutoff,name with op in {lt, ge}
            std::vector<std::string> parts;
            std::string cur;
            for (char c : spec) {
                if (c == ',') {
                    parts.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            parts.push_back(cur);
            if (parts.size() != 4) throw ConfigError("--rule needs col,op,cutoff,name");
            if (parts[1] != "lt" && parts[1] != "ge")
                throw ConfigError("--rule op must be lt or ge");
            rules.push_back({parts[0], parts[1] == "ge",
                             io::parse_double(parts[2], "--rule cutoff"), parts[3]});
        }
        result = grouping::groups_from_thresholds(features, rules);
    } else {
        throw ConfigError("group: need --annotations, --kmeans, or --rule");
    }
    print_warnings(result.warnings);
    io::write_groups_csv(out, result.groups);
    mb.emit(out);
    std::cout << "wrote " << out.string() << " (" << result.groups.group_count()
              << " groups x " << result.groups.rows() << " rows)\n";
    return 0;
}

// --- synth ---------------------------------------------------------------------

int cmd_synth(const std::filesystem::path& spec_path, std::uint64_t seed, bool have_seed,
              const std::filesystem::path& out, const std::filesystem::path& truth,
              ManifestBuilder& mb) {
    auto spec = io::read_synth_spec(spec_path);
    mb.input(spec_path);
    if (have_seed) spec.seed = seed;
    mb.seed(spec.seed);
    mb.config("rng", std::string(Rng::kAlgorithm));
    mb.config("n", std::to_string(spec.n));
    auto data = synth::generate(spec);
    io::write_dataset_csv(out, data.dataset);
    mb.emit(out);
    if (!truth.empty()) {
        io::write_truth_json(truth, data, spec);
        mb.emit(truth);
    }
    std::cout << "wrote " << out.string() << " (" << data.dataset.size() << " rows, rng "
              << data.rng_algorithm << ")\n";
    return 0;
}

// --- calibrate -------------------------------------------------------------------

ScoredDataset load_dataset(const std::filesystem::path& in, const std::string& groups_path,
                           ManifestBuilder& mb) {
    auto data = io::read_dataset_csv(in);
    mb.input(in);
    if (!groups_path.empty()) {
        auto groups = io::read_groups_csv(groups_path);
        mb.input(groups_path);
        if (groups.rows() != data.size())
            throw DataError("groups file has " + std::to_string(groups.rows()) +
                            " rows, dataset has " + std::to_string(data.size()));
        data = ScoredDataset(std::vector<double>(data.scores().begin(), data.scores().end()),
                             std::vector<int>(data.labels().begin(), data.labels().end()),
                             std::move(groups));
    }
    return data;
}

int cmd_calibrate(const std::string& method, double alpha, double epsilon, double val_fraction,
                  std::uint64_t seed, bool have_seed, const std::filesystem::path& in,
                  const std::string& groups_path, const std::filesystem::path& out,
                  const std::string& trace_path, ManifestBuilder& mb) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must be in (0,1)");
    auto data = load_dataset(in, groups_path, mb);

    calib::FitResult fit;
    if (method == "hb") {
        fit = calib::fit_hb(data, Grid::for_alpha(alpha).m());
    } else if (method == "ls") {
        fit = calib::fit_ls(data);
    } else if (method == "gcur") {
        fit = calib::fit_gcur(data);
    } else if (method == "gculr") {
        fit = calib::fit_gculr(data);
    } else if (method == "ighb") {
        calib::FitConfig config;
        config.alpha = alpha;
        fit = calib::fit_ighb(data, config);
    } else if (method == "iglb") {
        if (!have_seed) throw ConfigError("--method iglb requires --seed for the split");
        calib::FitConfig config;
        config.alpha = alpha;
        config.epsilon = epsilon;
        config.val_fraction = val_fraction;
        config.seed = seed;
        mb.seed(seed);
        fit = calib::fit_iglb(data, config);
    } else {
        throw ConfigError("unknown method '" + method + "'");
    }

    print_warnings(fit.trace.warnings);
    io::write_model_json(out, fit.model);
    mb.emit(out);
    if (!trace_path.empty()) {
        io::write_trace_json(trace_path, fit.trace);
        mb.emit(trace_path);
    }
    std::cout << "wrote " << out.string() << " (" << to_string(fit.model.method) << ", "
              << fit.model.patches.size() << " patches, stop: " << fit.trace.stop_reason
              << ")\n";
    return 0;
}

// --- evaluate ----------------------------------------------------------------------

int cmd_evaluate(double alpha, const std::filesystem::path& in, const std::string& groups_path,
                 const std::string& model_path, const std::filesystem::path& report_path,
                 const std::string& pergroup_path, ManifestBuilder& mb) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must be in (0,1)");
    auto data = load_dataset(in, groups_path, mb);
    if (!model_path.empty()) {
        auto model = io::read_model_json(model_path);
        mb.input(model_path);
        data = data.with_scores(calib::predict(model, data.scores(), data.groups()));
    }
    const Grid grid = Grid::for_alpha(alpha);
    auto rep = metrics::report(data, grid);
    if (rep.scores_rounded)
        std::cerr << "warning: off-grid scores rounded to m=" << grid.m()
                  << " for level-set metrics\n";
    io::write_report_json(report_path, rep, rep.scores_rounded);
    mb.emit(report_path);
    if (!pergroup_path.empty()) {
        io::write_pergroup_csv(pergroup_path, rep);
        mb.emit(pergroup_path);
    }
    std::cout << "mse " << rep.mse << ", asce " << rep.asce << ", worst violation "
              << rep.max_violation << " (" << rep.worst_group << ")\n";
    return 0;
}

// --- bench --------------------------------------------------------------------------

struct BenchCell {
    std::string method;
    std::uint64_t seed;
    double mse = 0.0;
    double accuracy = 0.0;
    double violation = 0.0;
    std::vector<double> gasce;  // per group, order of the dataset's columns
};

calib::FitResult fit_for_bench(const std::string& method, const ScoredDataset& train,
                               double alpha, double epsilon, double val_fraction,
                               std::uint64_t seed) {
    calib::FitConfig config;
    config.alpha = alpha;
    config.epsilon = epsilon;
    config.val_fraction = val_fraction;
    config.seed = seed;
    if (method == "hb") return calib::fit_hb(train, Grid::for_alpha(alpha).m());
    if (method == "ls") return calib::fit_ls(train);
    if (method == "gcur") return calib::fit_gcur(train);
    if (method == "gculr") return calib::fit_gculr(train);
    if (method == "ighb") return calib::fit_ighb(train, config);
    if (method == "iglb") return calib::fit_iglb(train, config);
    if (method == "ighb_tau") {
        config.comparators = {Comparator::LE, Comparator::GE};
        config.transform = calib::PatchKind::ConstantShift;
        return calib::fit_iterative(train, config);
    }
    if (method == "ighb_ls") {
        config.comparators = {Comparator::EQ};
        config.transform = calib::PatchKind::LogitLinear;
        return calib::fit_iterative(train, config);
    }
    throw ConfigError("unknown bench method '" + method + "'");
}

int cmd_bench(const std::filesystem::path& spec_path, const std::vector<std::string>& methods,
              const std::vector<std::uint64_t>& seeds, double alpha, double epsilon,
              double val_fraction, const std::filesystem::path& out, ManifestBuilder& mb) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must be in (0,1)");
    if (methods.empty() || seeds.empty()) throw ConfigError("bench needs methods and seeds");
    auto spec = io::read_synth_spec(spec_path);
    mb.input(spec_path);

    const Grid grid = Grid::for_alpha(alpha);
    std::vector<BenchCell> cells;
    std::vector<std::string> group_names;

    for (const auto& method : methods) {
        for (std::uint64_t seed : seeds) {
            auto train_spec = spec;
            train_spec.seed = seed;
            auto heldout_spec = spec;
            heldout_spec.seed = seed + 0x9E3779B9ull;  // documented derivation
            auto train = synth::generate(train_spec);
            auto heldout = synth::generate(heldout_spec);
            if (group_names.empty()) group_names = train.dataset.groups().names();

            std::vector<double> pred;
            if (method == "uncalib") {
                pred.assign(heldout.dataset.scores().begin(), heldout.dataset.scores().end());
            } else {
                auto fit = fit_for_bench(method, train.dataset, alpha, epsilon, val_fraction,
                                         seed);
                pred = calib::predict(fit.model, heldout.dataset.scores(),
                                      heldout.dataset.groups());
            }
            auto scored = heldout.dataset.with_scores(std::move(pred));

            BenchCell cell;
            cell.method = method;
            cell.seed = seed;
            cell.mse = metrics::mse(scored);
            cell.accuracy = metrics::accuracy(scored.scores(), scored.labels());
            cell.violation = metrics::multicalibration_violation(scored, grid).first;
            for (std::size_t k = 0; k < scored.groups().group_count(); ++k)
                cell.gasce.push_back(scored.groups().count(k)
                                         ? metrics::gasce(scored, grid, k)
                                         : 0.0);
            cells.push_back(std::move(cell));
        }
    }

    auto outfs = std::ofstream(out, std::ios::binary);
    if (!outfs) throw DataError("cannot open '" + out.string() + "' for writing");
    outfs << "method,seed,mse,accuracy,max_violation";
    for (const auto& name : group_names) outfs << ",gasce:" << name;
    outfs << "\n";
    for (const auto& cell : cells) {
        outfs << cell.method << ',' << cell.seed << ',' << io::format_double(cell.mse) << ','
              << io::format_double(cell.accuracy) << ',' << io::format_double(cell.violation);
        for (double g : cell.gasce) outfs << ',' << io::format_double(g);
        outfs << "\n";
    }
    // aggregate rows: mean and sample standard deviation per method
    for (const auto& method : methods) {
        std::vector<const BenchCell*> rows;
        for (const auto& cell : cells)
            if (cell.method == method) rows.push_back(&cell);
        const auto n = static_cast<double>(rows.size());
        auto agg = [&](auto getter, bool stddev) {
            double mean = 0.0;
            for (const auto* r : rows) mean += getter(*r);
            mean /= n;
            if (!stddev) return mean;
            if (rows.size() < 2) return 0.0;
            double var = 0.0;
            for (const auto* r : rows) var += (getter(*r) - mean) * (getter(*r) - mean);
            return std::sqrt(var / (n - 1.0));
        };
        for (bool stddev : {false, true}) {
            outfs << method << ',' << (stddev ? "stddev" : "mean") << ','
                  << io::format_double(agg([](const BenchCell& c) { return c.mse; }, stddev))
                  << ','
                  << io::format_double(
                         agg([](const BenchCell& c) { return c.accuracy; }, stddev))
                  << ','
                  << io::format_double(
                         agg([](const BenchCell& c) { return c.violation; }, stddev));
            for (std::size_t k = 0; k < group_names.size(); ++k)
                outfs << ','
                      << io::format_double(
                             agg([k](const BenchCell& c) { return c.gasce[k]; }, stddev));
            outfs << "\n";
        }
    }
    outfs.close();
    mb.emit(out);
    std::cout << "wrote " << out.string() << " (" << cells.size() << " cells)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-hoc calibration and multicalibration for confidence scores"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    // score
    auto* score = app.add_subcommand("score", "turn logit CSVs into confidence scores");
    std::string score_kind;
    std::string score_in, score_out;
    score->add_option("--kind", score_kind, "tf | ppl | mc")
        ->required()
        ->check(CLI::IsMember({"tf", "ppl", "mc"}));
    score->add_option("--in", score_in, "input logit CSV")->required();
    score->add_option("--out", score_out, "output score CSV")->required();

    // group
    auto* group = app.add_subcommand("group", "build group membership columns");
    std::string group_annotations, group_features, group_out;
    std::size_t group_k = 0;
    std::uint64_t group_seed = 0;
    std::vector<std::string> group_rules;
    group->add_option("--annotations", group_annotations, "0/1 annotation CSV");
    group->add_option("--features", group_features, "feature CSV");
    group->add_option("--kmeans", group_k, "cluster count (k-means on --features)");
    auto* group_seed_opt = group->add_option("--seed", group_seed, "rng seed");
    group->add_option("--rule", group_rules, "threshold rule col,op,cutoff,name (op: lt|ge)");
    group->add_option("--out", group_out, "output group CSV")->required();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scored dataset");
    std::string synth_spec, synth_out, synth_truth;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--spec", synth_spec,
                          "spec file (key = value; env MCAL_CONFIG overrides default)");
    auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "rng seed");
    synth_cmd->add_option("--out", synth_out, "output dataset CSV")->required();
    synth_cmd->add_option("--truth", synth_truth, "output truth-table JSON");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "fit a calibration model");
    std::string cal_method, cal_in, cal_groups, cal_out, cal_trace;
    double cal_alpha = 0.1, cal_epsilon = 0.01, cal_valfrac = 0.2;
    std::uint64_t cal_seed = 0;
    cal->add_option("--method", cal_method, "hb | ls | gcur | gculr | ighb | iglb")
        ->required()
        ->check(CLI::IsMember({"hb", "ls", "gcur", "gculr", "ighb", "iglb"}));
    cal->add_option("--alpha", cal_alpha, "approximation target; m = ceil(1/alpha)");
    cal->add_option("--epsilon", cal_epsilon, "minimum bin mass (iglb)");
    cal->add_option("--val-fraction", cal_valfrac, "validation share (iglb)");
    auto* cal_seed_opt = cal->add_option("--seed", cal_seed, "split seed (iglb)");
    cal->add_option("--in", cal_in, "dataset CSV")->required();
    cal->add_option("--groups", cal_groups, "optional group CSV replacing embedded groups");
    cal->add_option("--out", cal_out, "output model JSON")->required();
    cal->add_option("--trace", cal_trace, "output trace JSON");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "report calibration metrics");
    std::string eval_in, eval_groups, eval_model, eval_report, eval_pergroup;
    double eval_alpha = 0.1;
    eval->add_option("--alpha", eval_alpha, "grid target for level-set metrics");
    eval->add_option("--in", eval_in, "dataset CSV")->required();
    eval->add_option("--groups", eval_groups, "optional group CSV");
    eval->add_option("--model", eval_model, "apply this model before evaluating");
    eval->add_option("--report", eval_report, "output report JSON")->required();
    eval->add_option("--pergroup", eval_pergroup, "output per-group scatter CSV");

    // bench
    auto* bench = app.add_subcommand("bench", "method x seed grid on a synthetic spec");
    std::string bench_spec, bench_out;
    std::vector<std::string> bench_methods;
    std::vector<std::uint64_t> bench_seeds;
    double bench_alpha = 0.05, bench_epsilon = 0.01, bench_valfrac = 0.2;
    bench->add_option("--spec", bench_spec, "synthetic spec file");
    bench->add_option("--methods", bench_methods,
                      "uncalib,hb,ls,gcur,gculr,ighb,ighb_tau,ighb_ls,iglb")
        ->delimiter(',')
        ->required();
    bench->add_option("--seeds", bench_seeds, "seed list")->delimiter(',')->required();
    bench->add_option("--alpha", bench_alpha, "approximation target");
    bench->add_option("--epsilon", bench_epsilon, "minimum bin mass (iglb)");
    bench->add_option("--val-fraction", bench_valfrac, "validation share (iglb)");
    bench->add_option("--out", bench_out, "output table CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    ManifestBuilder mb(argc, argv);
    try {
        // MCAL_CONFIG may supply the spec path when the flag is absent.
        const char* env_spec = std::getenv("MCAL_CONFIG");
        if (synth_spec.empty() && env_spec) synth_spec = env_spec;
        if (bench_spec.empty() && env_spec) bench_spec = env_spec;

        if (*score) {
            mb.config("kind", score_kind);
            mb.input(score_in);
            return cmd_score(score_kind, score_in, score_out, mb);
        }
        if (*group) {
            if (group_k > 0 || !group_seed_opt->empty())
                mb.config("seed", std::to_string(group_seed));
            if (!group_seed_opt->empty()) mb.seed(group_seed);
            return cmd_group(group_annotations, group_features, group_k, group_seed,
                             !group_seed_opt->empty(), group_rules, group_out, mb);
        }
        if (*synth_cmd) {
            if (synth_spec.empty())
                throw ConfigError("synth: need --spec (or MCAL_CONFIG)");
            return cmd_synth(synth_spec, synth_seed, !synth_seed_opt->empty(), synth_out,
                             synth_truth, mb);
        }
        if (*cal) {
            mb.config("method", cal_method);
            mb.config("alpha", io::format_double(cal_alpha));
            mb.config("epsilon", io::format_double(cal_epsilon));
            mb.config("val_fraction", io::format_double(cal_valfrac));
            return cmd_calibrate(cal_method, cal_alpha, cal_epsilon, cal_valfrac, cal_seed,
                                 !cal_seed_opt->empty(), cal_in, cal_groups, cal_out,
                                 cal_trace, mb);
        }
        if (*eval) {
            mb.config("alpha", io::format_double(eval_alpha));
            return cmd_evaluate(eval_alpha, eval_in, eval_groups, eval_model, eval_report,
                                eval_pergroup, mb);
        }
        if (*bench) {
            if (bench_spec.empty())
                throw ConfigError("bench: need --spec (or MCAL_CONFIG)");
            mb.config("alpha", io::format_double(bench_alpha));
            mb.config("epsilon", io::format_double(bench_epsilon));
            return cmd_bench(bench_spec, bench_methods, bench_seeds, bench_alpha,
                             bench_epsilon, bench_valfrac, bench_out, mb);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Config: return 2;
            case ErrorKind::Data: return 3;
            case ErrorKind::Numeric: return 4;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
