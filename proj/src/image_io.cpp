#include "affectbench/errors.hpp"
#include "affectbench/frame.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace affectbench {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

[[noreturn]] void decode_fail(const fs::path& path, const std::string& reason) {
  throw DecodeError("cannot decode " + path.string() + ": " + reason);
}

Frame decode_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    decode_fail(path, image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    decode_fail(path, "unsupported bit depth (16-bit PNG)");
  }
  if (image.width == 0 || image.height == 0 || image.width > 1u << 15 || image.height > 1u << 15) {
    png_image_free(&image);
    decode_fail(path, "unsupported dimensions");
  }
  // Reading as RGBA keeps colour values untouched; the alpha column is then
  // dropped. Gray input is replicated into all three channels.
  image.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    decode_fail(path, message);
  }
  const int w = int(image.width);
  const int h = int(image.height);
  using Rgba = Eigen::Array<Channel, Eigen::Dynamic, 4, Eigen::RowMajor>;
  PixelArray px = Eigen::Map<const Rgba>(rgba.data(), Eigen::Index(w) * h, 4).leftCols<3>();
  return Frame(w, h, std::move(px));
}

// Skips whitespace and '#' comments between PPM header tokens.
std::size_t skip_ppm_space(const std::vector<unsigned char>& b, std::size_t pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  return pos;
}

long read_ppm_int(const std::vector<unsigned char>& b, std::size_t& pos, const fs::path& path) {
  pos = skip_ppm_space(b, pos);
  long value = 0;
  std::size_t digits = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    value = value * 10 + (b[pos] - '0');
    if (value > 1 << 20) decode_fail(path, "header value out of range");
    ++pos;
    ++digits;
  }
  if (digits == 0) decode_fail(path, "truncated or malformed PPM header");
  return value;
}

Frame decode_ppm(const std::vector<unsigned char>& b, const fs::path& path) {
  if (b[1] != '6') decode_fail(path, std::string("unsupported PPM variant P") + char(b[1]) + " (only binary P6)");
  std::size_t pos = 2;
  const long w = read_ppm_int(b, pos, path);
  const long h = read_ppm_int(b, pos, path);
  const long maxval = read_ppm_int(b, pos, path);
  if (maxval != 255) decode_fail(path, "unsupported bit depth (maxval " + std::to_string(maxval) + ", need 255)");
  if (w <= 0 || h <= 0 || w > 1 << 15 || h > 1 << 15) decode_fail(path, "unsupported dimensions");
  if (pos >= b.size() || !std::isspace(b[pos])) decode_fail(path, "truncated PPM header");
  ++pos;
  const std::size_t need = std::size_t(w) * std::size_t(h) * 3;
  if (b.size() - pos < need) {
    decode_fail(path, "truncated pixel data (" + std::to_string(b.size() - pos) + " of " + std::to_string(need) +
                          " bytes)");
  }
  PixelArray px = Eigen::Map<const PixelArray>(b.data() + pos, w * h, 3);
  return Frame(int(w), int(h), std::move(px));
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return ext;
}

}  // namespace

Frame load_frame(const fs::path& path) {
  const auto bytes = read_bytes(path);
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_ppm(bytes, path);
  if (bytes.empty()) decode_fail(path, "empty file");
  decode_fail(path, "unrecognized image format (expected PNG or binary PPM)");
}

void save_frame(const Frame& frame, const fs::path& path) {
  if (frame.empty()) throw ValidationError("cannot save an empty frame to " + path.string());
  const std::string ext = lower_extension(path);
  if (ext != ".png" && ext != ".ppm") throw ValidationError("unsupported output extension: " + path.string());

  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }

  if (ext == ".png") {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(frame.width());
    image.height = png_uint_32(frame.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, frame.pixels().data(), 0, nullptr)) {
      throw IoError("cannot write " + path.string() + ": " + image.message);
    }
    return;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels().data()), std::streamsize(frame.pixels().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace affectbench
