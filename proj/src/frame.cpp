#include "affectbench/frame.hpp"

#include "affectbench/errors.hpp"

#include <string>

namespace affectbench {

namespace {
void check_dimensions(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("frame dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
}
}  // namespace

Frame::Frame(int width, int height) : width_(width), height_(height) {
  check_dimensions(width, height);
  pixels_ = PixelArray::Zero(Eigen::Index(width) * height, 3);
}

Frame::Frame(int width, int height, PixelArray pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dimensions(width, height);
  if (pixels_.rows() != Eigen::Index(width) * height) {
    throw ValidationError("pixel count " + std::to_string(pixels_.rows()) + " does not match " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
}

Frame Frame::filled(int width, int height, Rgb value) {
  Frame f(width, height);
  f.pixels_.col(0).setConstant(value.r);
  f.pixels_.col(1).setConstant(value.g);
  f.pixels_.col(2).setConstant(value.b);
  return f;
}

Frame crop(const Frame& frame, const BoundingBox& box) {
  if (!box.fits(frame.width(), frame.height())) {
    throw ValidationError("bounding box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                          std::to_string(box.w) + "," + std::to_string(box.h) + ") exceeds " +
                          std::to_string(frame.width()) + "x" + std::to_string(frame.height()) + " frame");
  }
  PixelArray out(Eigen::Index(box.w) * box.h, 3);
  for (int j = 0; j < box.h; ++j) {
    out.middleRows(Eigen::Index(j) * box.w, box.w) = frame.pixels().middleRows(frame.index(box.x, box.y + j), box.w);
  }
  return Frame(box.w, box.h, std::move(out));
}

}  // namespace affectbench
