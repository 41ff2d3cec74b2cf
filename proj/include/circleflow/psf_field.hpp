#pragma once

#include <optional>
#include <vector>

#include "circleflow/chart.hpp"
#include "circleflow/image.hpp"

namespace circleflow {

// Grid of per-region, per-channel kernels over an image of known size.
// Cells without a kernel are holes (failed calibrations).
class PsfField {
 public:
  PsfField() = default;
  PsfField(int grid_rows, int grid_cols, int channels, int image_width, int image_height);

  // Every cell and channel set to the same kernel.
  static PsfField uniform(int grid_rows, int grid_cols, int channels, int image_width, int image_height,
                          const Kernel& k);

  int grid_rows() const { return grid_rows_; }
  int grid_cols() const { return grid_cols_; }
  int channels() const { return channels_; }
  int image_width() const { return image_width_; }
  int image_height() const { return image_height_; }
  int cell_count() const { return grid_rows_ * grid_cols_; }

  const std::optional<Kernel>& at(int row, int col, int channel) const;
  void set(int row, int col, int channel, Kernel k);
  void clear(int row, int col, int channel);
  // Kernel for `channel`, falling back to channel 0 for single-channel fields.
  const Kernel& kernel_for(int row, int col, int channel) const;
  std::size_t hole_count() const;

  std::vector<PatchBounds> bounds() const;
  PatchBounds bounds_of(int row, int col) const;

 private:
  std::size_t slot(int row, int col, int channel) const;

  int grid_rows_ = 0;
  int grid_cols_ = 0;
  int channels_ = 0;
  int image_width_ = 0;
  int image_height_ = 0;
  std::vector<std::optional<Kernel>> kernels_;
};

}  // namespace circleflow
