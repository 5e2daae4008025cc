#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcal/calibrators.hpp"
#include "mcal/data_model.hpp"
#include "mcal/grouping.hpp"
#include "mcal/metrics.hpp"
#include "mcal/synthetic.hpp"

namespace mcal {
namespace io {

// Doubles are written with the shortest representation that parses back to
// the identical bits, so file round-trips are exact.
std::string format_double(double v);
double parse_double(const std::string& cell, const std::string& context);

// --- dataset CSV: header "score,label,g:<name1>,...,g:<nameK>" -------------

ScoredDataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const ScoredDataset& data);

// --- group CSV: header "g:<name1>,..." (mergeable into the dataset format) -

GroupMatrix read_groups_csv(const std::filesystem::path& path);
void write_groups_csv(const std::filesystem::path& path, const GroupMatrix& groups);

// --- feature CSV: named numeric columns -------------------------------------

grouping::FeatureTable read_features_csv(const std::filesystem::path& path);

// --- ragged numeric CSV (logit inputs for the score command) ----------------

std::vector<std::vector<double>> read_ragged_csv(const std::filesystem::path& path);
void write_scores_csv(const std::filesystem::path& path, std::span<const double> scores);

// --- model / trace / report / truth JSON ------------------------------------

std::string model_to_json(const CalibratedModel& model);
CalibratedModel model_from_json(const std::string& text);
void write_model_json(const std::filesystem::path& path, const CalibratedModel& model);
CalibratedModel read_model_json(const std::filesystem::path& path);

void write_trace_json(const std::filesystem::path& path, const calib::FitTrace& trace);
void write_report_json(const std::filesystem::path& path, const metrics::CalibrationReport& rep,
                       bool rounded_warning);
void write_pergroup_csv(const std::filesystem::path& path,
                        const metrics::CalibrationReport& rep);
void write_truth_json(const std::filesystem::path& path, const synth::GeneratedData& data,
                      const synth::SyntheticSpec& spec);

// --- synthetic spec config file (key = value lines) --------------------------

synth::SyntheticSpec read_synth_spec(const std::filesystem::path& path);

// --- run manifest -------------------------------------------------------------

struct RunManifest {
    std::string tool_version;
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;  // echoed flags
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
    std::optional<std::uint64_t> seed;
    std::string started_utc;
    double elapsed_ms = 0.0;
};

// FNV-1a 64-bit over the file bytes, hex-encoded.
std::string file_digest(const std::filesystem::path& path);

// Written beside `output` as "<output>.manifest.json".
void write_manifest(const std::filesystem::path& output, const RunManifest& manifest);

}  // namespace io
}  // namespace mcal
