#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>

namespace affectbench {

using Channel = std::uint8_t;

/// One row per pixel (row-major raster order y * width + x), one column per
/// channel (r, g, b).
using PixelArray = Eigen::Array<Channel, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Single channel viewed as a height x width plane, without copying.
using ChannelPlane = Eigen::Map<const Eigen::Array<Channel, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>,
                                Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, 3>>;

struct Rgb {
  Channel r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster. Immutable once built: operators return new frames.
class Frame {
 public:
  Frame() = default;
  /// Black frame. Throws ValidationError for non-positive dimensions.
  Frame(int width, int height);
  /// Takes ownership of `pixels`; rows must equal width * height.
  Frame(int width, int height, PixelArray pixels);

  static Frame filled(int width, int height, Rgb value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Eigen::Index size() const noexcept { return pixels_.rows(); }
  bool empty() const noexcept { return pixels_.rows() == 0; }

  const PixelArray& pixels() const noexcept { return pixels_; }
  Eigen::Index index(int x, int y) const noexcept { return Eigen::Index(y) * width_ + x; }

  Rgb at(int x, int y) const noexcept {
    const auto row = pixels_.row(index(x, y));
    return {row(0), row(1), row(2)};
  }

  ChannelPlane plane(int channel) const noexcept {
    return ChannelPlane(pixels_.data() + channel, height_, width_,
                        Eigen::Stride<Eigen::Dynamic, 3>(Eigen::Index(width_) * 3, 3));
  }

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && (a.pixels_ == b.pixels_).all();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  PixelArray pixels_;
};

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  static BoundingBox full(const Frame& f) { return {0, 0, f.width(), f.height()}; }
  bool fits(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// `inner` is relative to `outer`'s origin.
inline BoundingBox compose(const BoundingBox& outer, const BoundingBox& inner) {
  return {outer.x + inner.x, outer.y + inner.y, inner.w, inner.h};
}

struct FrameRef {
  std::string participant_id;
  std::int64_t frame_index = 0;
  std::filesystem::path source_path;
};

/// Result pixel (i, j) is source pixel (box.x + i, box.y + j).
/// Throws ValidationError when the box leaves the frame.
Frame crop(const Frame& frame, const BoundingBox& box);

/// PNG (8-bit gray/RGB/RGBA/palette; alpha dropped, gray replicated) or
/// binary PPM (P6, maxval 255), chosen by file signature.
Frame load_frame(const std::filesystem::path& path);

/// Format chosen by extension (.png or .ppm). Creates parent directories.
void save_frame(const Frame& frame, const std::filesystem::path& path);

}  // namespace affectbench
