#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biascal/harness.hpp"

namespace biascal {

// File names inside the output directory.
inline constexpr const char* kExamplesFile = "per_example.jsonl";
inline constexpr const char* kCellsFile = "cells.csv";
inline constexpr const char* kAggregatesFile = "aggregates.csv";
inline constexpr const char* kTiersFile = "tiers.csv";
inline constexpr const char* kBiasFile = "bias.csv";
inline constexpr const char* kCorrelationFile = "bias_correlation.csv";
inline constexpr const char* kSweepFile = "sensitivity.csv";

// Shortest round-trip decimal form; the same double always prints the same.
std::string format_double(double x);

// per_example.jsonl starts with {"record":"header","config":<header>} and
// holds one record per (dataset, seed, method, example). cells.csv has one
// row per (dataset, seed, method); aggregates.csv one row per (dataset,
// method); bias.csv and tiers.csv are written when bias tiers were computed.
void write_eval_report(const EvalReport& report, const nlohmann::ordered_json& header,
                       const std::filesystem::path& out_dir);

// bias.csv: dataset_id,model_id,bias,tier (plus error column); and
// bias_correlation.csv when more than one model was scanned.
void write_bias_scan(const BiasScanResult& result, const std::filesystem::path& out_dir);

void write_sweep(const std::vector<SweepPoint>& points, SweepAxis axis, const std::string& dataset_id,
                 const std::filesystem::path& out_dir);

}  // namespace biascal
