#include "mcal/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mcal {
namespace io {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

int parse_label(const std::string& cell, std::size_t line_no) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw DataError("ParseError(line " + std::to_string(line_no) + "): label '" + cell +
                    "' is not 0/1");
}

std::uint8_t parse_bit(const std::string& cell, std::size_t line_no) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw DataError("ParseError(line " + std::to_string(line_no) + "): group cell '" + cell +
                    "' is not 0/1");
}

json transform_to_json(const PatchTransform& tr) {
    json j;
    if (const auto* shift = std::get_if<ConstantShift>(&tr)) {
        j["kind"] = "shift";
        j["delta"] = shift->delta;
    } else {
        const auto& ll = std::get<LogitLinear>(tr);
        j["kind"] = "logit_linear";
        j["a"] = ll.alpha;
        j["b"] = ll.beta;
    }
    return j;
}

PatchTransform transform_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "shift") return ConstantShift{j.at("delta").get<double>()};
    if (kind == "logit_linear")
        return LogitLinear{j.at("a").get<double>(), j.at("b").get<double>()};
    throw DataError("model JSON: unknown transform kind '" + kind + "'");
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw DataError("ParseError(" + context + "): bad number '" + cell + "'");
    return v;
}

ScoredDataset read_dataset_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("ParseError(line 1): empty dataset file");
    const auto header = split_line(line);
    if (header.size() < 2 || header[0] != "score" || header[1] != "label")
        throw DataError("ParseError(line 1): dataset header must start 'score,label'");
    std::vector<std::string> names;
    for (std::size_t c = 2; c < header.size(); ++c) {
        if (header[c].rfind("g:", 0) != 0)
            throw DataError("ParseError(line 1): group column '" + header[c] +
                            "' must be named 'g:<name>'");
        names.push_back(header[c].substr(2));
    }

    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::vector<std::uint8_t>> columns(names.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("ParseError(line " + std::to_string(line_no) + "): expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        scores.push_back(parse_double(cells[0], "line " + std::to_string(line_no)));
        labels.push_back(parse_label(cells[1], line_no));
        for (std::size_t c = 0; c < names.size(); ++c)
            columns[c].push_back(parse_bit(cells[c + 2], line_no));
    }

    auto result = validate_dataset(std::move(scores), std::move(labels), std::move(columns),
                                   std::move(names));
    if (!result.ok()) {
        std::string msg = "invalid dataset '" + path.string() + "':";
        for (const auto& v : result.violations) msg += " " + v.message + ";";
        throw DataError(msg);
    }
    return std::move(*result.dataset);
}

void write_dataset_csv(const std::filesystem::path& path, const ScoredDataset& data) {
    auto out = open_out(path);
    out << "score,label";
    for (const auto& name : data.groups().names()) out << ",g:" << name;
    out << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << format_double(data.scores()[i]) << ',' << data.labels()[i];
        for (std::size_t k = 0; k < data.groups().group_count(); ++k)
            out << ',' << (data.groups().member(i, k) ? '1' : '0');
        out << "\n";
    }
}

GroupMatrix read_groups_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("ParseError(line 1): empty groups file");
    const auto header = split_line(line);
    std::vector<std::string> names;
    for (const auto& h : header) {
        if (h.rfind("g:", 0) != 0)
            throw DataError("ParseError(line 1): group column '" + h + "' must be 'g:<name>'");
        names.push_back(h.substr(2));
    }
    std::vector<std::vector<std::uint8_t>> columns(names.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != names.size())
            throw DataError("ParseError(line " + std::to_string(line_no) + "): cell count");
        for (std::size_t c = 0; c < names.size(); ++c)
            columns[c].push_back(parse_bit(cells[c], line_no));
    }
    const std::size_t n = columns.empty() ? 0 : columns[0].size();
    const bool has_all = std::find(names.begin(), names.end(), kAllGroup) != names.end();
    return has_all ? GroupMatrix(n, std::move(columns), std::move(names))
                   : GroupMatrix::with_all_column(n, std::move(columns), std::move(names));
}

void write_groups_csv(const std::filesystem::path& path, const GroupMatrix& groups) {
    auto out = open_out(path);
    for (std::size_t k = 0; k < groups.group_count(); ++k)
        out << (k ? "," : "") << "g:" << groups.name(k);
    out << "\n";
    for (std::size_t i = 0; i < groups.rows(); ++i) {
        for (std::size_t k = 0; k < groups.group_count(); ++k)
            out << (k ? "," : "") << (groups.member(i, k) ? '1' : '0');
        out << "\n";
    }
}

grouping::FeatureTable read_features_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("ParseError(line 1): empty features file");
    const auto names = split_line(line);
    std::vector<double> values;
    std::size_t line_no = 1;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != names.size())
            throw DataError("ParseError(line " + std::to_string(line_no) + "): cell count");
        for (const auto& cell : cells)
            values.push_back(parse_double(cell, "line " + std::to_string(line_no)));
        ++rows;
    }
    return grouping::FeatureTable(rows, names.size(), std::move(values), names);
}

std::vector<std::vector<double>> read_ragged_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split_line(line))
            row.push_back(parse_double(cell, "line " + std::to_string(line_no)));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_scores_csv(const std::filesystem::path& path, std::span<const double> scores) {
    auto out = open_out(path);
    out << "score\n";
    for (double s : scores) out << format_double(s) << "\n";
}

std::string model_to_json(const CalibratedModel& model) {
    model.validate();
    json j;
    j["version"] = 1;
    j["method"] = to_string(model.method);
    j["m"] = model.m;
    j["patches"] = json::array();
    for (const auto& patch : model.patches) {
        json p = transform_to_json(patch.transform);
        p["p"] = patch.bin.level;
        p["cmp"] = to_string(patch.bin.cmp);
        p["group"] = patch.bin.group_index;
        j["patches"].push_back(std::move(p));
    }
    j["coefficients"] = model.coefficients;
    j["group_names"] = model.group_names;
    return j.dump(2) + "\n";
}

CalibratedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model JSON parse error: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) throw DataError("model JSON: unsupported version");
        CalibratedModel model;
        model.method = method_from_string(j.at("method").get<std::string>());
        model.m = j.at("m").get<int>();
        for (const auto& p : j.at("patches")) {
            Patch patch;
            patch.bin.level = p.at("p").get<double>();
            patch.bin.cmp = comparator_from_string(p.at("cmp").get<std::string>());
            patch.bin.group_index = p.at("group").get<std::size_t>();
            patch.transform = transform_from_json(p);
            model.patches.push_back(std::move(patch));
        }
        model.coefficients = j.at("coefficients").get<std::vector<double>>();
        model.group_names = j.at("group_names").get<std::vector<std::string>>();
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model JSON schema error: ") + e.what());
    }
}

void write_model_json(const std::filesystem::path& path, const CalibratedModel& model) {
    open_out(path) << model_to_json(model);
}

CalibratedModel read_model_json(const std::filesystem::path& path) {
    std::ostringstream buf;
    buf << open_in(path).rdbuf();
    return model_from_json(buf.str());
}

void write_trace_json(const std::filesystem::path& path, const calib::FitTrace& trace) {
    json j;
    j["initial_mse"] = trace.initial_mse;
    if (trace.initial_val_mse) j["initial_val_mse"] = *trace.initial_val_mse;
    j["stop_reason"] = trace.stop_reason;
    j["warnings"] = trace.warnings;
    j["iterations"] = trace.iterations;
    j["converged"] = trace.converged;
    j["clip_rate"] = trace.clip_rate;
    j["rounds"] = json::array();
    for (const auto& r : trace.rounds) {
        json round = transform_to_json(r.transform);
        round["round"] = r.round;
        round["p"] = r.bin.level;
        round["cmp"] = to_string(r.bin.cmp);
        round["group"] = r.bin.group_index;
        round["mass"] = r.mass;
        round["bias"] = r.bias;
        round["mse_calib"] = r.mse_calib;
        if (r.mse_val) round["mse_val"] = *r.mse_val;
        j["rounds"].push_back(std::move(round));
    }
    open_out(path) << j.dump(2) << "\n";
}

void write_report_json(const std::filesystem::path& path, const metrics::CalibrationReport& rep,
                       bool rounded_warning) {
    json j;
    j["asce"] = rep.asce;
    j["mse"] = rep.mse;
    j["ece"] = rep.ece;
    j["accuracy"] = rep.accuracy;
    j["max_violation"] = rep.max_violation;
    j["worst_group"] = rep.worst_group;
    j["scores_rounded"] = rounded_warning;
    j["per_group"] = json::array();
    for (const auto& g : rep.per_group) {
        json gj;
        gj["group"] = g.name;
        gj["mass"] = g.mass;
        gj["mean_score"] = g.mean_score;
        gj["mean_label"] = g.mean_label;
        gj["gasce"] = g.gasce;
        gj["violation"] = g.violation;
        gj["empty"] = g.empty;
        j["per_group"].push_back(std::move(gj));
    }
    j["per_bin"] = json::array();
    for (const auto& b : rep.per_bin) {
        json bj;
        bj["p"] = b.bin.level;
        bj["count"] = b.count;
        bj["mass"] = b.mass;
        bj["mean_label"] = b.mean_label;
        bj["mean_score"] = b.mean_score;
        bj["bias"] = b.bias;
        j["per_bin"].push_back(std::move(bj));
    }
    open_out(path) << j.dump(2) << "\n";
}

void write_pergroup_csv(const std::filesystem::path& path,
                        const metrics::CalibrationReport& rep) {
    auto out = open_out(path);
    out << "group,mass,mean_score,mean_label,gasce,violation\n";
    for (const auto& g : rep.per_group) {
        if (g.empty) continue;
        out << g.name << ',' << format_double(g.mass) << ',' << format_double(g.mean_score)
            << ',' << format_double(g.mean_label) << ',' << format_double(g.gasce) << ','
            << format_double(g.violation) << "\n";
    }
}

void write_truth_json(const std::filesystem::path& path, const synth::GeneratedData& data,
                      const synth::SyntheticSpec& spec) {
    json j;
    j["rng"] = data.rng_algorithm;
    j["seed"] = spec.seed;
    j["n"] = spec.n;
    j["group_names"] = json::array();
    for (const auto& g : spec.groups) j["group_names"].push_back(g.name);
    j["signatures"] = json::array();
    for (const auto& s : data.truth) {
        json sj;
        sj["mask"] = s.mask;
        sj["weight"] = s.weight;
        sj["p_true"] = s.p_true;
        sj["score"] = s.score;
        j["signatures"].push_back(std::move(sj));
    }
    open_out(path) << j.dump(2) << "\n";
}

synth::SyntheticSpec read_synth_spec(const std::filesystem::path& path) {
    auto in = open_in(path);
    synth::SyntheticSpec spec;
    std::string line;
    std::size_t line_no = 0;

    auto parse_list = [](const std::string& value) {
        std::vector<std::string> items;
        std::string cur;
        for (char c : value) {
            if (c == ',') {
                items.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) items.push_back(cur);
        return items;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string ctx = "line " + std::to_string(line_no);

        if (key == "n") {
            spec.n = static_cast<std::size_t>(parse_double(value, ctx));
        } else if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_double(value, ctx));
        } else if (key == "group_model") {
            if (value == "bernoulli") spec.group_model = synth::GroupModel::Bernoulli;
            else if (value == "partition") spec.group_model = synth::GroupModel::Partition;
            else throw ConfigError("spec " + ctx + ": unknown group_model '" + value + "'");
        } else if (key == "groups") {
            for (const auto& item : parse_list(value)) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw ConfigError("spec " + ctx + ": groups entries must be name:rate");
                spec.groups.push_back(
                    {item.substr(0, colon), parse_double(item.substr(colon + 1), ctx)});
            }
        } else if (key == "true_prob") {
            if (value == "logistic") spec.true_prob.kind = synth::TrueProbKind::Logistic;
            else if (value == "table") spec.true_prob.kind = synth::TrueProbKind::Table;
            else throw ConfigError("spec " + ctx + ": unknown true_prob '" + value + "'");
        } else if (key == "base_logit") {
            spec.true_prob.base_logit = parse_double(value, ctx);
        } else if (key == "weights") {
            for (const auto& item : parse_list(value))
                spec.true_prob.weights.push_back(parse_double(item, ctx));
        } else if (key.rfind("p[", 0) == 0 && key.back() == ']') {
            // Explicit table entry: p[bitstring] = value, lowest group first.
            const std::string bits = key.substr(2, key.size() - 3);
            std::uint64_t mask = 0;
            for (std::size_t g = 0; g < bits.size(); ++g) {
                if (bits[g] == '1') mask |= std::uint64_t{1} << g;
                else if (bits[g] != '0')
                    throw ConfigError("spec " + ctx + ": bad signature bits '" + bits + "'");
            }
            spec.true_prob.table[mask] = parse_double(value, ctx);
        } else if (key == "miscal") {
            if (value == "identity") spec.miscal.kind = synth::MiscalKind::Identity;
            else if (value == "logit_shift") spec.miscal.kind = synth::MiscalKind::LogitShift;
            else if (value == "logit_scale") spec.miscal.kind = synth::MiscalKind::LogitScale;
            else if (value == "noise") spec.miscal.kind = synth::MiscalKind::Noise;
            else throw ConfigError("spec " + ctx + ": unknown miscal '" + value + "'");
        } else if (key == "deltas") {
            for (const auto& item : parse_list(value))
                spec.miscal.deltas.push_back(parse_double(item, ctx));
        } else if (key == "gamma") {
            spec.miscal.gamma = parse_double(value, ctx);
        } else if (key == "sigma") {
            spec.miscal.sigma = parse_double(value, ctx);
        } else {
            throw ConfigError("spec " + ctx + ": unknown key '" + key + "'");
        }
    }
    return spec;
}

std::string file_digest(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::uint64_t hash = 1469598103934665603ull;  // FNV-1a offset basis
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a64:") + hex;
}

void write_manifest(const std::filesystem::path& output, const RunManifest& manifest) {
    json j;
    j["tool_version"] = manifest.tool_version;
    j["command"] = manifest.command;
    j["config"] = json::object();
    for (const auto& [key, value] : manifest.config) j["config"][key] = value;
    j["inputs"] = json::array();
    for (const auto& [path, digest] : manifest.inputs) {
        json ij;
        ij["path"] = path;
        ij["digest"] = digest;
        j["inputs"].push_back(std::move(ij));
    }
    if (manifest.seed) j["seed"] = *manifest.seed;
    j["started_utc"] = manifest.started_utc;
    j["elapsed_ms"] = manifest.elapsed_ms;
    std::filesystem::path manifest_path = output;
    manifest_path += ".manifest.json";
    open_out(manifest_path) << j.dump(2) << "\n";
}

}  // namespace io
}  // namespace mcal
