#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "circleflow/error.hpp"

namespace circleflow::cli {

namespace {

// Dark purple -> orange -> pale yellow.
Rgb colormap(double t) {
  static const Rgb stops[] = {{0.0, 0.0, 0.02}, {0.32, 0.07, 0.45}, {0.72, 0.21, 0.40}, {0.98, 0.55, 0.25},
                              {0.99, 0.99, 0.75}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double a = t - i;
  Rgb c;
  for (int ch = 0; ch < 3; ++ch) c[ch] = (1 - a) * stops[i][ch] + a * stops[i + 1][ch];
  return c;
}

void put(Image& img, int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = c[ch];
}

void line(Image& img, double x0, double y0, double x1, double y1, const Rgb& c) {
  const int n = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)) * 2)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    put(img, x, y, c);
    put(img, x, y + 1, c);
  }
}

struct Frame {
  int left = 36;
  int right = 12;
  int top = 12;
  int bottom = 28;
  int w = 0;
  int h = 0;
  double px(double f) const { return left + f / 0.5 * (w - left - right); }
  double py(double m) const { return top + (1.05 - m) / 1.05 * (h - top - bottom); }
};

}  // namespace

Image kernel_heatmap(const Kernel& k, int scale) {
  require(scale >= 1, "heatmap scale must be positive");
  const int n = k.side() * scale;
  Image out(n, n, 3);
  const double mx = k.max();
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) put(out, x, y, colormap(mx > 0 ? k.at(x / scale, y / scale) / mx : 0.0));
  }
  return out;
}

Image field_heatmap(const PsfField& field, int channel, int scale) {
  int side = 1;
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      if (const auto& k = field.at(r, c, channel)) side = std::max(side, k->side());
    }
  }
  const int tile = side * scale;
  const int gap = 2;
  Image out(field.grid_cols() * (tile + gap) + gap, field.grid_rows() * (tile + gap) + gap, 3, 1.0);
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      const int x0 = gap + c * (tile + gap);
      const int y0 = gap + r * (tile + gap);
      const auto& k = field.at(r, c, channel);
      if (!k) {
        for (int y = 0; y < tile; ++y)
          for (int x = 0; x < tile; ++x) put(out, x0 + x, y0 + y, {0.6, 0.6, 0.6});
        continue;
      }
      const Image hm = kernel_heatmap(*k, scale);
      const int off = (tile - hm.width()) / 2;
      for (int y = 0; y < hm.height(); ++y)
        for (int x = 0; x < hm.width(); ++x)
          put(out, x0 + off + x, y0 + off + y, {hm.at(x, y, 0), hm.at(x, y, 1), hm.at(x, y, 2)});
    }
  }
  return out;
}

Image mtf_plot(const std::vector<PlotSeries>& series, int width, int height) {
  Image img(width, height, 3, 1.0);
  Frame f;
  f.w = width;
  f.h = height;
  const Rgb grid{0.85, 0.85, 0.85};
  const Rgb axis{0.2, 0.2, 0.2};
  for (double m : {0.25, 0.5, 0.75, 1.0}) line(img, f.px(0), f.py(m), f.px(0.5), f.py(m), grid);
  for (double q : {0.125, 0.25, 0.375}) line(img, f.px(q), f.py(0), f.px(q), f.py(1.05), grid);
  line(img, f.px(0), f.py(0), f.px(0.5), f.py(0), axis);
  line(img, f.px(0), f.py(0), f.px(0), f.py(1.05), axis);
  for (const auto& s : series) {
    const auto& fr = s.curve.frequencies;
    const auto& m = s.curve.modulation;
    for (std::size_t i = 1; i < fr.size(); ++i) {
      line(img, f.px(fr[i - 1]), f.py(std::clamp(m[i - 1], 0.0, 1.05)), f.px(fr[i]),
           f.py(std::clamp(m[i], 0.0, 1.05)), s.color);
    }
  }
  return img;
}

std::string mtf_svg(const std::vector<PlotSeries>& series, const std::vector<std::string>& labels, int width,
                    int height) {
  Frame f;
  f.w = width;
  f.h = height;
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof(buf), "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">", width,
                height);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>";
  for (double m : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%.2f</text>",
                  f.px(0), f.py(m), f.px(0.5), f.py(m), f.px(0) - 4, f.py(m) + 3, m);
    s += buf;
  }
  for (double q : {0.0, 0.125, 0.25, 0.375, 0.5}) {
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"middle\">%.3g</text>",
                  f.px(q), f.py(0) + 14, q);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%d\" font-size=\"10\" text-anchor=\"middle\">cycles/pixel</text>",
                f.px(0.25), height - 2);
  s += buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& c = series[k].color;
    char color[16];
    std::snprintf(color, sizeof(color), "#%02x%02x%02x", static_cast<int>(c[0] * 255), static_cast<int>(c[1] * 255),
                  static_cast<int>(c[2] * 255));
    s += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"";
    s += color;
    s += "\" points=\"";
    const auto& fr = series[k].curve.frequencies;
    const auto& m = series[k].curve.modulation;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", f.px(fr[i]), f.py(std::clamp(m[i], 0.0, 1.05)));
      s += buf;
    }
    s += "\"/>";
    if (k < labels.size()) {
      std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" fill=\"%s\" text-anchor=\"end\">",
                    f.px(0.5) - 4, f.py(1.05) + 12.0 * (k + 1), color);
      s += buf;
      s += labels[k];
      s += "</text>";
    }
  }
  s += "</svg>";
  return s;
}

std::string base64(const std::string& bytes) {
  static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
  }
  if (i < bytes.size()) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? tbl[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

}  // namespace circleflow::cli
