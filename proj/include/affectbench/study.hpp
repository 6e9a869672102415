#pragma once

#include "affectbench/manifest.hpp"
#include "affectbench/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace affectbench {

/// Command-line overrides applied on top of a manifest.
struct StudyOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  /// Restricts the run to these condition names; names absent from the
  /// manifest are added with default parameters.
  std::optional<std::vector<std::string>> conditions;
  std::optional<double> zero_tolerance;
  bool batch_mode = false;
};

StudyManifest apply_overrides(StudyManifest manifest, const StudyOverrides& overrides);

struct ParticipantPlan {
  ParticipantSpec spec;
  /// Sorted by frame_index, exclusions removed.
  std::vector<FrameRef> frames;
};

struct StudyPlan {
  StudyManifest manifest;
  std::vector<ParticipantPlan> participants;

  std::size_t frame_count() const;
  /// "original" followed by every condition name, in manifest order.
  std::vector<std::string> condition_names() const;
};

/// Enumerates frames (.png/.ppm) per participant. Indices come from the
/// numeric file stem when every stem is numeric, otherwise from sorted
/// position; the manifest index_map overrides both. Checks the bounding box
/// against the first and last frame. Throws ValidationError.
StudyPlan ingest(const StudyManifest& manifest);

/// Seed used for participant's noise frames (before the per-frame step).
std::uint64_t participant_noise_seed(std::uint64_t global_seed, const CorruptionSpec& spec,
                                     const std::string& participant_id);

struct RunContext {
  std::size_t workers = 1;
  /// Progress and warnings; may be null.
  std::ostream* log = nullptr;
};

struct StageResult {
  bool skipped = false;
  std::size_t files_written = 0;
  std::vector<std::string> warnings;
};

// Output layout under manifest.output_dir:
//   <condition>/<participant>/<frame_index:06>.png      (condition incl. original)
//   predictions/<participant>/<condition>.csv
//   evaluation/<participant>/<condition>_<dimension>.json
//   deviations/<participant>/<condition>_<dimension>.csv
//   reports/summary.csv, ccc_distribution.csv, trends.csv, report.json
//   ledger.json, run.log
std::filesystem::path frame_output_path(const std::filesystem::path& out, const std::string& condition,
                                        const std::string& participant, std::int64_t frame_index);
std::filesystem::path prediction_path(const std::filesystem::path& out, const std::string& participant,
                                      const std::string& condition);
std::filesystem::path evaluation_path(const std::filesystem::path& out, const std::string& participant,
                                      const std::string& condition, Dimension d);
std::filesystem::path deviation_path(const std::filesystem::path& out, const std::string& participant,
                                     const std::string& condition, Dimension d);
std::filesystem::path reports_dir(const std::filesystem::path& out);

/// Crops every frame and writes it under original/, then writes each
/// condition applied to the cropped original.
StageResult run_corruption_stage(const StudyPlan& plan, const RunContext& ctx = {});
/// Runs the predictor over original and every condition; one worker owns
/// one predictor session.
StageResult run_prediction_stage(const StudyPlan& plan, const RunContext& ctx = {});
/// Per-cell statistics and deviation series, then the aggregate report.
StageResult run_evaluation_stage(const StudyPlan& plan, const RunContext& ctx = {});
/// Rebuilds reports/ from the per-cell evaluation files.
StageResult run_report_stage(const StudyPlan& plan, const RunContext& ctx = {});

std::vector<StageResult> run_study(const StudyPlan& plan, const RunContext& ctx = {});

/// Runs fn(i, w) for i in [0, count) on up to `workers` threads, w being the
/// index of the running thread. After the first exception no new items start;
/// it is rethrown once all threads stop.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t index, std::size_t worker)>& fn);

}  // namespace affectbench
