#pragma once

// Test-only helpers and independent oracles. Nothing here calls into the
// code paths it is used to check.

#include "affectbench/frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

namespace affectbench::testing {

inline Frame random_frame(std::mt19937_64& gen, int w, int h) {
  std::uniform_int_distribution<int> channel(0, 255);
  PixelArray px(Eigen::Index(w) * h, 3);
  for (Eigen::Index i = 0; i < px.size(); ++i) px.data()[i] = Channel(channel(gen));
  return Frame(w, h, std::move(px));
}

inline Frame frame_from(int w, int h, const std::vector<Rgb>& pixels) {
  PixelArray px(Eigen::Index(w) * h, 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) px.row(Eigen::Index(i)) << pixels[i].r, pixels[i].g, pixels[i].b;
  return Frame(w, h, std::move(px));
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("affectbench-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// --- Oracles ---------------------------------------------------------------

inline Channel round_clamp(double v) {
  // floor(v + 0.5) matches half-away-from-zero for the non-negative values here.
  const double r = std::floor(v + 0.5);
  return Channel(r < 0 ? 0 : (r > 255 ? 255 : r));
}

/// Dense 2D Gaussian convolution with clamp-to-edge indexing, computed from
/// the unnormalised exponential and normalised by the 2D weight sum.
inline Frame dense_gaussian_oracle(const Frame& f, double sigma) {
  const int r = int(std::ceil(3 * sigma));
  std::vector<double> w2d;
  double total = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      w2d.push_back(w);
      total += w;
    }
  }
  std::vector<Rgb> out;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double acc[3] = {0, 0, 0};
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx, ++k) {
          const int sx = std::min(std::max(x + dx, 0), f.width() - 1);
          const int sy = std::min(std::max(y + dy, 0), f.height() - 1);
          const Rgb p = f.at(sx, sy);
          acc[0] += w2d[k] * p.r;
          acc[1] += w2d[k] * p.g;
          acc[2] += w2d[k] * p.b;
        }
      }
      out.push_back({round_clamp(acc[0] / total), round_clamp(acc[1] / total), round_clamp(acc[2] / total)});
    }
  }
  return frame_from(f.width(), f.height(), out);
}

inline Frame brightness_oracle(const Frame& f, double gain) {
  std::vector<Rgb> out;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const Rgb p = f.at(x, y);
      out.push_back({round_clamp(p.r * gain), round_clamp(p.g * gain), round_clamp(p.b * gain)});
    }
  }
  return frame_from(f.width(), f.height(), out);
}

inline Frame motion_oracle(const Frame& f, int shift) {
  std::vector<Rgb> out;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const int sx = std::min(std::max(x - shift, 0), f.width() - 1);
      out.push_back(f.at(sx, y));
    }
  }
  return frame_from(f.width(), f.height(), out);
}

inline Frame crop_oracle(const Frame& f, const BoundingBox& b) {
  std::vector<Rgb> out;
  for (int j = 0; j < b.h; ++j) {
    for (int i = 0; i < b.w; ++i) out.push_back(f.at(b.x + i, b.y + j));
  }
  return frame_from(b.w, b.h, out);
}

/// Eq.-1 form: 2 rho sx sy / (sx^2 + sy^2 + (mx - my)^2), evaluated from
/// plain sums in long double.
inline double ccc_direct(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double vxx = 0, vyy = 0, vxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    vxx += (x[i] - mx) * (x[i] - mx);
    vyy += (y[i] - my) * (y[i] - my);
    vxy += (x[i] - mx) * (y[i] - my);
  }
  const long double sdx = std::sqrt(vxx / n), sdy = std::sqrt(vyy / n);
  const long double rho = (vxy / n) / (sdx * sdy);
  return double(2 * rho * sdx * sdy / (sdx * sdx + sdy * sdy + (mx - my) * (mx - my)));
}

inline double pearson_direct(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return double(sxy / std::sqrt(sxx * syy));
}

/// Central interval [lo, hi] holding at least `coverage` of Binomial(n, p),
/// from the exact pmf accumulated in log space.
inline std::pair<int, int> binomial_interval(int n, double p, double coverage) {
  const double tail = (1.0 - coverage) / 2.0;
  std::vector<double> pmf(std::size_t(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double logp = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                        (n - k) * std::log1p(-p);
    pmf[std::size_t(k)] = std::exp(logp);
  }
  int lo = 0;
  double acc = 0;
  while (acc + pmf[std::size_t(lo)] <= tail) acc += pmf[std::size_t(lo++)];
  int hi = n;
  acc = 0;
  while (acc + pmf[std::size_t(hi)] <= tail) acc += pmf[std::size_t(hi--)];
  return {lo, hi};
}

}  // namespace affectbench::testing
