#include "circleflow/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "circleflow/error.hpp"
#include "json.hpp"

namespace circleflow {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) fail(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

void png_error_fn(png_structp, png_const_charp msg) { throw Error(ErrorCode::kIo, std::string("PNG error: ") + msg); }
void png_warning_fn(png_structp, png_const_charp) {}

// Writes rows through a libpng write struct; `setup` installs the output sink.
template <typename Setup>
void write_png_impl(const Image& img, int bit_depth, Setup setup) {
  require(img.channels() == 1 || img.channels() == 3, "PNG export needs 1 or 3 channels");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (png == nullptr) fail(ErrorCode::kIo, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  setup(png);
  const int color = img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), bit_depth,
               color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int bytes = bit_depth / 8;
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<png_byte> row(static_cast<std::size_t>(img.width()) * img.channels() * bytes);
  for (int y = 0; y < img.height(); ++y) {
    std::size_t o = 0;
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const auto q = static_cast<unsigned>(std::lround(std::clamp(img.at(x, y, c), 0.0, 1.0) * maxv));
        if (bytes == 2) {
          row[o++] = static_cast<png_byte>(q >> 8);  // PNG is big-endian
          row[o++] = static_cast<png_byte>(q & 0xff);
        } else {
          row[o++] = static_cast<png_byte>(q);
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

void write_to_string(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}
void flush_noop(png_structp) {}

}  // namespace

void write_png16(const fs::path& path, const Image& img) {
  FilePtr f = open_file(path, "wb");
  write_png_impl(img, 16, [&](png_structp png) { png_init_io(png, f.get()); });
}

void write_png8(const fs::path& path, const Image& rgb) {
  FilePtr f = open_file(path, "wb");
  write_png_impl(rgb, 8, [&](png_structp png) { png_init_io(png, f.get()); });
}

std::string encode_png8(const Image& rgb) {
  std::string out;
  write_png_impl(rgb, 8, [&](png_structp png) { png_set_write_fn(png, &out, write_to_string, flush_noop); });
  return out;
}

Image read_png(const fs::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (png == nullptr) fail(ErrorCode::kIo, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  png_init_io(png, f.get());
  png_read_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if ((color & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int channels = png_get_channels(png, info);
  const int bytes = png_get_bit_depth(png, info) == 16 ? 2 : 1;
  const double maxv = bytes == 2 ? 65535.0 : 255.0;
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  const int out_c = channels >= 3 ? 3 : 1;
  Image img(w, h, out_c);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < out_c; ++c) {
        const std::size_t o = (static_cast<std::size_t>(x) * channels + c) * bytes;
        const unsigned q = bytes == 2 ? (static_cast<unsigned>(row[o]) << 8) | row[o + 1] : row[o];
        img.at(x, y, c) = q / maxv;
      }
    }
  }
  png_read_end(png, nullptr);
  return img;
}

void write_pfm(const fs::path& path, const Image& img) {
  require(img.channels() == 1 || img.channels() == 3, "PFM needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string());
  out << (img.channels() == 3 ? "PF" : "Pf") << "\n" << img.width() << " " << img.height() << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(img.width()) * img.channels());
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        row[static_cast<std::size_t>(x) * img.channels() + c] = static_cast<float>(img.at(x, y, c));
      }
    }
    if constexpr (std::endian::native == std::endian::big) {
      for (float& v : row) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        u = __builtin_bswap32(u);
        std::memcpy(&v, &u, 4);
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Image read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  int w = 0;
  int h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0.0) {
    fail(ErrorCode::kIo, "malformed PFM header in " + path.string());
  }
  const int c = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  Image img(w, h, c);
  std::vector<float> row(static_cast<std::size_t>(w) * c);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) fail(ErrorCode::kIo, "truncated PFM " + path.string());
    for (std::size_t i = 0; i < row.size(); ++i) {
      float v = row[i];
      if (little != (std::endian::native == std::endian::little)) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        u = __builtin_bswap32(u);
        std::memcpy(&v, &u, 4);
      }
      img.values()[static_cast<std::size_t>(y) * w * c + i] = v;
    }
  }
  return img;
}

void write_flow_pfm(const fs::path& path, const FlowField& v) {
  Image img(v.width, v.height, 3);
  for (std::size_t i = 0; i < v.size(); ++i) {
    img.values()[3 * i] = v.dx[i];
    img.values()[3 * i + 1] = v.dy[i];
  }
  write_pfm(path, img);
}

void write_raw(const fs::path& path, const RawMosaic& raw) {
  write_png16(path, raw.data);
  nlohmann::json side = {{"pattern", std::string(cfa_name(raw.pattern))}, {"width", raw.width}, {"height", raw.height}};
  write_text(fs::path(path.string() + ".json"), side.dump(2) + "\n");
}

RawMosaic read_raw(const fs::path& path) {
  Image img = read_png(path);
  require(img.channels() == 1, "raw mosaic PNG must be single-channel");
  const fs::path sidecar(path.string() + ".json");
  CfaPattern pattern = CfaPattern::kRGGB;
  if (fs::exists(sidecar)) {
    const auto j = nlohmann::json::parse(read_text(sidecar));
    pattern = parse_cfa(j.at("pattern").get<std::string>());
  }
  RawMosaic raw{img.width(), img.height(), pattern, std::move(img)};
  return raw;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace circleflow
