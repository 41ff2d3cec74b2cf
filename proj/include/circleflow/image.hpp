#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace circleflow {

// Row-major, channel-interleaved floating-point raster.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1, double fill = 0.0);
  Image(int width, int height, int channels, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  // Single-channel copy of channel c.
  Image channel(int c) const;
  void set_channel(int c, const Image& plane);
  Image crop(int x0, int y0, int w, int h) const;
  void paste(const Image& src, int x0, int y0);
  Image clamped01() const;
  double mean() const;
  bool all_finite() const;

  static Image merge(const std::vector<Image>& planes);

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Odd-sided nonnegative point-spread kernel with unit sum.
class Kernel {
 public:
  static constexpr double kSumTolerance = 1e-6;

  Kernel() = default;
  // Validates side parity, nonnegativity and unit sum.
  Kernel(int side, std::vector<double> weights);

  // Clamps negatives to zero and rescales to unit sum.
  static Kernel normalized(int side, std::vector<double> weights);
  static Kernel delta(int side);
  static Kernel uniform(int side);

  int side() const { return side_; }
  int radius() const { return side_ / 2; }
  double at(int col, int row) const { return data_[static_cast<std::size_t>(row) * side_ + col]; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }
  double sum() const;
  double max() const;
  Image as_image() const;

 private:
  int side_ = 0;
  std::vector<double> data_;
};

// Per-pixel displacement; sampling is backward (output pixel -> source).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> dx;
  std::vector<double> dy;

  FlowField() = default;
  FlowField(int w, int h, double fx = 0.0, double fy = 0.0)
      : width(w), height(h),
        dx(static_cast<std::size_t>(w) * h, fx),
        dy(static_cast<std::size_t>(w) * h, fy) {}

  std::size_t size() const { return dx.size(); }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool all_finite() const;
  FlowField& operator+=(const FlowField& other);
};

}  // namespace circleflow
