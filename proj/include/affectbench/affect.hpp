#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affectbench {

inline constexpr std::string_view kOriginalCondition = "original";

enum class Dimension { arousal, valence };

std::string_view to_string(Dimension d);

inline bool in_affect_range(double v) { return v >= -1.0 && v <= 1.0; }

struct AffectSample {
  std::int64_t frame_index = 0;
  std::optional<double> arousal;
  std::optional<double> valence;
  bool valid = false;

  /// Valid iff both values are present and within [-1, 1].
  static AffectSample make(std::int64_t frame_index, std::optional<double> arousal,
                           std::optional<double> valence) {
    const bool ok = arousal && valence && in_affect_range(*arousal) && in_affect_range(*valence);
    return {frame_index, arousal, valence, ok};
  }
  static AffectSample invalid(std::int64_t frame_index) { return {frame_index, std::nullopt, std::nullopt, false}; }

  double value(Dimension d) const { return d == Dimension::arousal ? *arousal : *valence; }

  friend bool operator==(const AffectSample&, const AffectSample&) = default;
};

struct AffectSequence {
  std::string participant_id;
  std::string condition;
  std::vector<AffectSample> samples;

  /// Throws ValidationError unless frame indices strictly increase and each
  /// valid flag agrees with its values.
  void validate() const;

  friend bool operator==(const AffectSequence&, const AffectSequence&) = default;
};

}  // namespace affectbench
