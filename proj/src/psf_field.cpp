#include "circleflow/psf_field.hpp"

#include <algorithm>

#include "circleflow/error.hpp"

namespace circleflow {

PsfField::PsfField(int grid_rows, int grid_cols, int channels, int image_width, int image_height)
    : grid_rows_(grid_rows),
      grid_cols_(grid_cols),
      channels_(channels),
      image_width_(image_width),
      image_height_(image_height) {
  require(grid_rows >= 1 && grid_cols >= 1, "PSF field grid must be at least 1x1");
  require(channels == 1 || channels == 3, "PSF field must have 1 or 3 channels");
  require(grid_rows <= image_height && grid_cols <= image_width, "PSF field grid larger than image");
  kernels_.resize(static_cast<std::size_t>(grid_rows) * grid_cols * channels);
}

PsfField PsfField::uniform(int grid_rows, int grid_cols, int channels, int image_width, int image_height,
                           const Kernel& k) {
  PsfField f(grid_rows, grid_cols, channels, image_width, image_height);
  for (auto& slot : f.kernels_) slot = k;
  return f;
}

std::size_t PsfField::slot(int row, int col, int channel) const {
  require(row >= 0 && row < grid_rows_ && col >= 0 && col < grid_cols_ && channel >= 0 && channel < channels_,
          "PSF field index out of range");
  return (static_cast<std::size_t>(row) * grid_cols_ + col) * channels_ + channel;
}

const std::optional<Kernel>& PsfField::at(int row, int col, int channel) const {
  return kernels_[slot(row, col, channel)];
}

void PsfField::set(int row, int col, int channel, Kernel k) { kernels_[slot(row, col, channel)] = std::move(k); }

void PsfField::clear(int row, int col, int channel) { kernels_[slot(row, col, channel)].reset(); }

const Kernel& PsfField::kernel_for(int row, int col, int channel) const {
  const auto& k = at(row, col, channels_ == 1 ? 0 : channel);
  if (!k) fail(ErrorCode::kInvalidInput, "PSF field has a hole at the requested cell");
  return *k;
}

std::size_t PsfField::hole_count() const {
  return static_cast<std::size_t>(std::count_if(kernels_.begin(), kernels_.end(), [](const auto& k) { return !k; }));
}

std::vector<PatchBounds> PsfField::bounds() const {
  return grid_bounds(image_width_, image_height_, grid_rows_, grid_cols_);
}

PatchBounds PsfField::bounds_of(int row, int col) const {
  return bounds()[static_cast<std::size_t>(row) * grid_cols_ + col];
}

}  // namespace circleflow
