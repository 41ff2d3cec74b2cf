#include "circleflow/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "circleflow/error.hpp"

namespace circleflow {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kNoBimodalStructure: return "NoBimodalStructure";
    case ErrorCode::kEmptyRoi: return "EmptyRoi";
    case ErrorCode::kDegenerateKernel: return "DegenerateKernel";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kCalibrationFailed: return "CalibrationFailed";
    case ErrorCode::kNoEdgeFound: return "NoEdgeFound";
    case ErrorCode::kDivergentRestoration: return "DivergentRestoration";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  require(width >= 0 && height >= 0, "image dimensions must be nonnegative");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  require(width >= 0 && height >= 0, "image dimensions must be nonnegative");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  require(data_.size() == static_cast<std::size_t>(width) * height * channels,
          "image data length does not match width x height x channels");
}

Image Image::channel(int c) const {
  require(c >= 0 && c < channels_, "channel index out of range");
  Image out(width_, height_, 1);
  for (std::size_t i = 0; i < pixel_count(); ++i) out.data_[i] = data_[i * channels_ + c];
  return out;
}

void Image::set_channel(int c, const Image& plane) {
  require(c >= 0 && c < channels_, "channel index out of range");
  require(plane.width_ == width_ && plane.height_ == height_ && plane.channels_ == 1,
          "plane shape mismatch");
  for (std::size_t i = 0; i < pixel_count(); ++i) data_[i * channels_ + c] = plane.data_[i];
}

Image Image::crop(int x0, int y0, int w, int h) const {
  require(x0 >= 0 && y0 >= 0 && w >= 0 && h >= 0 && x0 + w <= width_ && y0 + h <= height_,
          "crop rectangle outside image");
  Image out(w, h, channels_);
  for (int y = 0; y < h; ++y) {
    const auto* src = &data_[index(x0, y0 + y)];
    std::copy(src, src + static_cast<std::size_t>(w) * channels_, &out.data_[out.index(0, y)]);
  }
  return out;
}

void Image::paste(const Image& src, int x0, int y0) {
  require(src.channels_ == channels_, "paste channel mismatch");
  require(x0 >= 0 && y0 >= 0 && x0 + src.width_ <= width_ && y0 + src.height_ <= height_,
          "paste rectangle outside image");
  for (int y = 0; y < src.height_; ++y) {
    const auto* row = &src.data_[src.index(0, y)];
    std::copy(row, row + static_cast<std::size_t>(src.width_) * channels_, &data_[index(x0, y0 + y)]);
  }
}

Image Image::clamped01() const {
  Image out = *this;
  for (double& v : out.data_) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double Image::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Image Image::merge(const std::vector<Image>& planes) {
  require(planes.size() == 1 || planes.size() == 3, "merge needs 1 or 3 planes");
  const int w = planes[0].width();
  const int h = planes[0].height();
  Image out(w, h, static_cast<int>(planes.size()));
  for (std::size_t c = 0; c < planes.size(); ++c) out.set_channel(static_cast<int>(c), planes[c]);
  return out;
}

Kernel::Kernel(int side, std::vector<double> weights) : side_(side), data_(std::move(weights)) {
  require(side > 0 && side % 2 == 1, "kernel side must be odd and positive");
  require(data_.size() == static_cast<std::size_t>(side) * side, "kernel data length must be side^2");
  for (double w : data_) {
    require(std::isfinite(w) && w >= 0.0, "kernel weights must be finite and nonnegative");
  }
  require(std::abs(sum() - 1.0) <= kSumTolerance, "kernel weights must sum to 1");
}

Kernel Kernel::normalized(int side, std::vector<double> weights) {
  require(side > 0 && side % 2 == 1, "kernel side must be odd and positive");
  require(weights.size() == static_cast<std::size_t>(side) * side, "kernel data length must be side^2");
  double total = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w) || w < 0.0) w = 0.0;
    total += w;
  }
  if (!(total > 0.0)) fail(ErrorCode::kDegenerateKernel, "kernel has no positive mass");
  for (double& w : weights) w /= total;
  return Kernel(side, std::move(weights));
}

Kernel Kernel::delta(int side) {
  std::vector<double> w(static_cast<std::size_t>(side) * side, 0.0);
  w[w.size() / 2] = 1.0;
  return Kernel(side, std::move(w));
}

Kernel Kernel::uniform(int side) {
  const auto n = static_cast<std::size_t>(side) * side;
  return Kernel(side, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double Kernel::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Kernel::max() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

Image Kernel::as_image() const { return Image(side_, side_, 1, data_); }

bool FlowField::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(dx.begin(), dx.end(), finite) && std::all_of(dy.begin(), dy.end(), finite);
}

FlowField& FlowField::operator+=(const FlowField& other) {
  require(width == other.width && height == other.height, "flow field dimension mismatch");
  for (std::size_t i = 0; i < dx.size(); ++i) {
    dx[i] += other.dx[i];
    dy[i] += other.dy[i];
  }
  return *this;
}

}  // namespace circleflow
