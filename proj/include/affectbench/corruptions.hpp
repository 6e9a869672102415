#pragma once

#include "affectbench/frame.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace affectbench {

enum class CorruptionKind { lighter, darker, gaussian, noise, motion };

std::string_view to_string(CorruptionKind kind);
/// Accepts the canonical lower-case names; "Gaussian" is also accepted.
CorruptionKind parse_corruption_kind(std::string_view name);

struct CorruptionDefaults {
  static constexpr double lighter_gain = 1.3;
  static constexpr double darker_gain = 0.7;
  static constexpr double sigma = 1.0;
  static constexpr double flip_probability = 0.01;
  static constexpr int shift = 10;
};

/// One image condition. Only the parameter belonging to `kind` is set.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::lighter;
  std::optional<double> gain;
  std::optional<double> sigma;
  std::optional<double> flip_probability;
  std::optional<int> shift;
  std::uint64_t seed = 0;

  /// Spec for `kind` with its default parameter filled in.
  static CorruptionSpec defaults(CorruptionKind kind, std::uint64_t seed = 0);

  std::string name() const { return std::string(to_string(kind)); }

  /// Throws ValidationError on a missing/foreign parameter or out-of-range value.
  void validate() const;

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

/// Normalized 1D Gaussian taps for i in [-r, r], r = ceil(3 sigma).
Eigen::ArrayXd gaussian_kernel(double sigma);

/// round(c * gain) clamped to [0, 255] per channel.
Frame adjust_brightness(const Frame& frame, double gain);

/// Separable blur, clamp-to-edge borders, one rounding at the end.
Frame gaussian_blur(const Frame& frame, double sigma);

/// Whole-pixel impulse noise. Pixel p draws (u1, u2) from the Philox stream
/// keyed by `seed` at position p; u1 < probability flips it to white when
/// u2 < 0.5, else black.
Frame salt_pepper(const Frame& frame, double flip_probability, std::uint64_t seed);

/// out(x, y) = in(clamp(x - shift, 0, w - 1), y).
Frame horizontal_motion(const Frame& frame, int shift);

/// Per-frame noise seed used by apply().
std::uint64_t frame_noise_seed(std::uint64_t seed, std::int64_t frame_index);

/// Dispatches `spec` onto `frame`. Noise uses frame_noise_seed(spec.seed, frame_index).
Frame apply(const Frame& frame, const CorruptionSpec& spec, std::int64_t frame_index);

}  // namespace affectbench
