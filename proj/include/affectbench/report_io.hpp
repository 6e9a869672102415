#pragma once

#include "affectbench/affect.hpp"
#include "affectbench/metrics.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace affectbench {

/// Shortest decimal text that parses back to the same double ('.' separator).
std::string format_number(double value);
double parse_number(std::string_view text);

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view value);

/// Whole-file helpers. write_text_file creates parent directories and throws
/// IoError on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

// Prediction CSV: participant_id,condition,frame_index,arousal,valence,valid
// Invalid samples leave arousal/valence empty.
inline constexpr std::string_view kPredictionHeader = "participant_id,condition,frame_index,arousal,valence,valid";
std::string prediction_csv(const AffectSequence& sequence);
AffectSequence parse_prediction_csv(std::string_view text);

// Deviation CSV: frame_index,original,condition_value,delta
inline constexpr std::string_view kDeviationHeader = "frame_index,original,condition_value,delta";
std::string deviation_csv(const DeviationSeries& dev);

// Per-cell evaluation JSON object.
std::string cell_json(const CellResult& cell);
CellResult parse_cell_json(std::string_view text);

// Summary CSV: one row per condition, min/max CCC for both dimensions.
inline constexpr std::string_view kSummaryHeader =
    "condition,arousal_min_ccc,arousal_max_ccc,valence_min_ccc,valence_max_ccc";
std::string summary_csv(std::span<const SummaryTableRow> rows);
std::vector<SummaryTableRow> parse_summary_csv(std::string_view text);

// CCC distribution: condition,dimension,participant_id,ccc
inline constexpr std::string_view kDistributionHeader = "condition,dimension,participant_id,ccc";
std::string distribution_csv(const Summary& summary);

// Trends: condition,dimension,aggregation,pos_pct,neg_pct,zero_pct
inline constexpr std::string_view kTrendHeader = "condition,dimension,aggregation,pos_pct,neg_pct,zero_pct";
std::string trend_csv(const Summary& summary);

}  // namespace affectbench
