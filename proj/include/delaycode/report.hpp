#pragma once

#include <string>

#include <json.hpp>

#include "delaycode/evaluation.hpp"

namespace delaycode {

/// Header `config,node,day,fold,f1`; f1 printed with 10 decimals.
std::string scores_csv(const FoldScoreTable& table);
/// Throws SchemaError on malformed input.
FoldScoreTable parse_scores_csv(const std::string& text);
FoldScoreTable read_scores_csv(const std::string& path);

nlohmann::json aggregates_json(const FoldScoreTable& table);

/// Plain-text summary: one block per level, one line per node, columns per config and day.
std::string report_text(const FoldScoreTable& table);

/// Writes scores.csv, aggregates.json and report.txt into `dir` (created if needed).
void render_report(const FoldScoreTable& table, const std::string& dir, const nlohmann::json& run_info = {});

}  // namespace delaycode
