#pragma once

#include <filesystem>
#include <string>

#include "circleflow/image.hpp"
#include "circleflow/psf_field.hpp"
#include "circleflow/sensor.hpp"

namespace circleflow {

// 16-bit grayscale or RGB PNG; values are clamped to [0, 1] on write.
void write_png16(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);  // 8- or 16-bit, gray or RGB(A)

// 8-bit RGB PNG for plots and heatmaps.
void write_png8(const std::filesystem::path& path, const Image& rgb);
std::string encode_png8(const Image& rgb);  // in-memory, for inline HTML

// Portable float map, little-endian, rows stored bottom to top.
void write_pfm(const std::filesystem::path& path, const Image& img);
Image read_pfm(const std::filesystem::path& path);
// Flow as a 3-channel PFM holding (dx, dy, 0).
void write_flow_pfm(const std::filesystem::path& path, const FlowField& v);

// Raw mosaic: 16-bit single-channel PNG plus "<path>.json" naming the pattern.
void write_raw(const std::filesystem::path& path, const RawMosaic& raw);
RawMosaic read_raw(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace circleflow
