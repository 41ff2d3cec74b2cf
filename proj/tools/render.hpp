#pragma once

#include <array>
#include <string>
#include <vector>

#include "circleflow/image.hpp"
#include "circleflow/metrics.hpp"
#include "circleflow/psf_field.hpp"

namespace circleflow::cli {

using Rgb = std::array<double, 3>;

// Per-kernel max normalization, nearest-neighbour magnified by `scale`.
Image kernel_heatmap(const Kernel& k, int scale);

// One channel of a field as a tiled heatmap; holes are drawn flat gray.
Image field_heatmap(const PsfField& field, int channel, int scale);

struct PlotSeries {
  MtfCurve curve;
  Rgb color{0, 0, 0};
};

// Modulation vs frequency on [0, 0.5] x [0, 1.05], raster plot for PNG export.
Image mtf_plot(const std::vector<PlotSeries>& series, int width = 360, int height = 240);

// The same plot as inline SVG, with axis labels and a legend.
std::string mtf_svg(const std::vector<PlotSeries>& series, const std::vector<std::string>& labels,
                    int width = 360, int height = 240);

std::string base64(const std::string& bytes);

}  // namespace circleflow::cli
