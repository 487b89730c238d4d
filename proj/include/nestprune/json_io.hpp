#pragma once

// JSON forms of configs and reports. Key names mirror the C++ field names;
// README.md documents the schema.

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <vector>

#include "nestprune/bench.hpp"
#include "nestprune/cv_engine.hpp"

namespace nestprune {

nlohmann::ordered_json pruner_config_to_json(const PrunerConfig& config);

// Applies the keys present in `j` on top of `base`. Unknown keys are rejected
// with a ValidationError naming them.
PrunerConfig pruner_config_from_json(const nlohmann::json& j, PrunerConfig base);

// Variant file: {"variants": [{"name": ..., "pruner": <preset>, <PrunerConfig keys>...}, ...]}.
// Each variant starts from `base`, then its preset, then its explicit keys.
std::vector<PrunerVariant> read_variants(const std::filesystem::path& path, const PrunerConfig& base);
std::vector<PrunerVariant> parse_variants(const nlohmann::json& j, const PrunerConfig& base);

nlohmann::ordered_json study_report_to_json(const StudyReport& report);
void write_study_report_json(const StudyReport& report, std::ostream& out);

nlohmann::ordered_json bench_report_to_json(const BenchReport& report);
BenchReport bench_report_from_json(const nlohmann::json& j);

}  // namespace nestprune
