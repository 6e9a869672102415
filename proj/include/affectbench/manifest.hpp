#pragma once

#include "affectbench/corruptions.hpp"
#include "affectbench/frame.hpp"
#include "affectbench/predictor.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace affectbench {

/// Inclusive frame-index interval removed before any processing.
struct IndexRange {
  std::int64_t first = 0;
  std::int64_t last = 0;
  bool contains(std::int64_t i) const noexcept { return i >= first && i <= last; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct ParticipantSpec {
  std::string id;
  std::filesystem::path frames_dir;
  BoundingBox bbox;
  std::vector<IndexRange> exclude_ranges;
  /// Optional filename -> frame index override for non-contiguous exports.
  std::map<std::string, std::int64_t> index_map;
};

/// Declarative study description. JSON layout:
///
///   {
///     "participants": [{"id": "p01", "frames_dir": "frames/p01",
///                       "bbox": {"x": 0, "y": 0, "w": 64, "h": 64},
///                       "exclude_ranges": [[0, 4]]}],
///     "conditions": [{"kind": "lighter", "gain": 1.3},
///                    {"kind": "noise", "flip_probability": 0.01, "seed": 7}],
///     "predictor": "builtin:mock" | ["cmd", "arg"] |
///                  {"command": ["cmd"], "timeout_s": 30, "batch": false},
///     "output_dir": "out",
///     "global_seed": 42,
///     "zero_tolerance": 0.0
///   }
///
/// Omitted condition parameters take their defaults; a parameter that does
/// not belong to the kind is rejected. "conditions" defaults to all five.
/// Relative paths are resolved against the manifest's directory.
struct StudyManifest {
  std::vector<ParticipantSpec> participants;
  std::vector<CorruptionSpec> conditions;
  PredictorCommand predictor;
  std::filesystem::path output_dir;
  std::uint64_t global_seed = 0;
  double zero_tolerance = 0.0;

  /// Throws ValidationError on duplicate ids/kinds, bad ranges, bad specs.
  /// An empty output_dir is allowed here; stages reject it.
  void validate() const;
};

StudyManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
StudyManifest load_manifest(const std::filesystem::path& path);
/// Canonical JSON form (paths absolute, defaults explicit). Stable across runs.
std::string manifest_json(const StudyManifest& manifest);

CorruptionSpec parse_corruption_spec(std::string_view json_text);
std::string corruption_spec_json(const CorruptionSpec& spec);

/// All five conditions with default parameters, in reporting order.
std::vector<CorruptionSpec> default_conditions();

}  // namespace affectbench
