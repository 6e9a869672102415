#include "affectbench/corruptions.hpp"

#include "affectbench/counter_rng.hpp"
#include "affectbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace affectbench {

std::string_view to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::lighter: return "lighter";
    case CorruptionKind::darker: return "darker";
    case CorruptionKind::gaussian: return "gaussian";
    case CorruptionKind::noise: return "noise";
    case CorruptionKind::motion: return "motion";
  }
  return "unknown";
}

CorruptionKind parse_corruption_kind(std::string_view name) {
  if (name == "lighter") return CorruptionKind::lighter;
  if (name == "darker") return CorruptionKind::darker;
  if (name == "gaussian" || name == "Gaussian") return CorruptionKind::gaussian;
  if (name == "noise") return CorruptionKind::noise;
  if (name == "motion") return CorruptionKind::motion;
  throw ValidationError("unknown corruption kind '" + std::string(name) + "'");
}

CorruptionSpec CorruptionSpec::defaults(CorruptionKind kind, std::uint64_t seed) {
  CorruptionSpec s;
  s.kind = kind;
  switch (kind) {
    case CorruptionKind::lighter: s.gain = CorruptionDefaults::lighter_gain; break;
    case CorruptionKind::darker: s.gain = CorruptionDefaults::darker_gain; break;
    case CorruptionKind::gaussian: s.sigma = CorruptionDefaults::sigma; break;
    case CorruptionKind::noise:
      s.flip_probability = CorruptionDefaults::flip_probability;
      s.seed = seed;
      break;
    case CorruptionKind::motion: s.shift = CorruptionDefaults::shift; break;
  }
  return s;
}

void CorruptionSpec::validate() const {
  const std::string label(to_string(kind));
  const bool wants_gain = kind == CorruptionKind::lighter || kind == CorruptionKind::darker;
  const bool wants_sigma = kind == CorruptionKind::gaussian;
  const bool wants_prob = kind == CorruptionKind::noise;
  const bool wants_shift = kind == CorruptionKind::motion;

  auto check = [&](bool wanted, bool present, const char* field) {
    if (wanted && !present) throw ValidationError(label + ": missing parameter '" + field + "'");
    if (!wanted && present) throw ValidationError(label + ": parameter '" + field + "' does not apply");
  };
  check(wants_gain, gain.has_value(), "gain");
  check(wants_sigma, sigma.has_value(), "sigma");
  check(wants_prob, flip_probability.has_value(), "flip_probability");
  check(wants_shift, shift.has_value(), "shift");

  if (gain && !(*gain > 0.0 && std::isfinite(*gain))) throw ValidationError(label + ": gain must be > 0");
  if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) throw ValidationError(label + ": sigma must be > 0");
  if (flip_probability && !(*flip_probability >= 0.0 && *flip_probability <= 1.0)) {
    throw ValidationError(label + ": flip_probability must lie in [0, 1]");
  }
  if (shift && *shift < 0) throw ValidationError(label + ": shift must be >= 0");
}

namespace {

// Rounds half away from zero and clamps to the channel range.
template <typename Derived>
PixelArray to_channels(const Eigen::ArrayBase<Derived>& values) {
  return values.round().max(0.0).min(255.0).template cast<Channel>();
}

}  // namespace

Eigen::ArrayXd gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("gaussian sigma must be > 0");
  const int radius = int(std::ceil(3.0 * sigma));
  const Eigen::ArrayXd offsets = Eigen::ArrayXd::LinSpaced(2 * radius + 1, -radius, radius);
  Eigen::ArrayXd k = (-offsets.square() / (2.0 * sigma * sigma)).exp();
  return k / k.sum();
}

Frame adjust_brightness(const Frame& frame, double gain) {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw ValidationError("brightness gain must be > 0");
  return Frame(frame.width(), frame.height(), to_channels(frame.pixels().cast<double>() * gain));
}

Frame gaussian_blur(const Frame& frame, double sigma) {
  const Eigen::ArrayXd k = gaussian_kernel(sigma);
  const int radius = int(k.size() / 2);
  const int w = frame.width();
  const int h = frame.height();

  // Clamp-to-edge source index for every tap along each axis.
  auto clamp_col = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto clamp_row = [h](int y) { return std::clamp(y, 0, h - 1); };

  Eigen::ArrayXXd out_planes(Eigen::Index(w) * h, 3);
  for (int c = 0; c < 3; ++c) {
    const Eigen::ArrayXXd src = frame.plane(c).cast<double>();
    Eigen::ArrayXXd horiz = Eigen::ArrayXXd::Zero(h, w);
    for (int x = 0; x < w; ++x) {
      for (int i = -radius; i <= radius; ++i) horiz.col(x) += k(i + radius) * src.col(clamp_col(x + i));
    }
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vert =
        Eigen::ArrayXXd::Zero(h, w);
    for (int y = 0; y < h; ++y) {
      for (int i = -radius; i <= radius; ++i) vert.row(y) += k(i + radius) * horiz.row(clamp_row(y + i));
    }
    out_planes.col(c) = Eigen::Map<const Eigen::ArrayXd>(vert.data(), vert.size());
  }
  return Frame(w, h, to_channels(out_planes));
}

Frame salt_pepper(const Frame& frame, double flip_probability, std::uint64_t seed) {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ValidationError("flip probability must lie in [0, 1]");
  }
  PixelArray px = frame.pixels();
  for (Eigen::Index p = 0; p < px.rows(); ++p) {
    const auto u = rng::uniform_pair(seed, std::uint64_t(p));
    if (u.first < flip_probability) px.row(p).setConstant(u.second < 0.5 ? 255 : 0);
  }
  return Frame(frame.width(), frame.height(), std::move(px));
}

Frame horizontal_motion(const Frame& frame, int shift) {
  if (shift < 0) throw ValidationError("motion shift must be >= 0");
  const int w = frame.width();
  const int h = frame.height();
  PixelArray px(frame.size(), 3);
  for (int y = 0; y < h; ++y) {
    const Eigen::Index row = Eigen::Index(y) * w;
    // Columns [0, s) replicate column 0; the rest is the row moved right.
    const int s = std::min(shift, w);
    px.middleRows(row, s).rowwise() = frame.pixels().row(row);
    px.middleRows(row + s, w - s) = frame.pixels().middleRows(row, w - s);
  }
  return Frame(w, h, std::move(px));
}

std::uint64_t frame_noise_seed(std::uint64_t seed, std::int64_t frame_index) {
  return rng::derive_seed(seed, std::uint64_t(frame_index));
}

Frame apply(const Frame& frame, const CorruptionSpec& spec, std::int64_t frame_index) {
  spec.validate();
  switch (spec.kind) {
    case CorruptionKind::lighter:
    case CorruptionKind::darker: return adjust_brightness(frame, *spec.gain);
    case CorruptionKind::gaussian: return gaussian_blur(frame, *spec.sigma);
    case CorruptionKind::noise:
      return salt_pepper(frame, *spec.flip_probability, frame_noise_seed(spec.seed, frame_index));
    case CorruptionKind::motion: return horizontal_motion(frame, *spec.shift);
  }
  throw ValidationError("unhandled corruption kind");
}

}  // namespace affectbench
