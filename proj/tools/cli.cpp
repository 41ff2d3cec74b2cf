#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "circleflow/benchmark.hpp"
#include "circleflow/chart.hpp"
#include "circleflow/deblur.hpp"
#include "circleflow/error.hpp"
#include "circleflow/io.hpp"
#include "circleflow/metrics.hpp"
#include "circleflow/optics_sim.hpp"
#include "circleflow/optim.hpp"
#include "circleflow/sensor.hpp"
#include "circleflow/serialization.hpp"
#include "render.hpp"

namespace circleflow::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool log_info() {
  const char* lvl = std::getenv("CIRCLEFLOW_LOG");
  return lvl != nullptr && (std::string(lvl) == "info" || std::string(lvl) == "debug");
}

std::pair<int, int> parse_grid(const std::string& s) {
  int r = 0;
  int c = 0;
  char x = 0;
  std::istringstream in(s);
  if (!(in >> r >> x >> c) || (x != 'x' && x != 'X') || !in.eof() || r < 1 || c < 1) {
    throw UsageError("grid must look like ROWSxCOLS, got '" + s + "'");
  }
  return {r, c};
}

std::array<int, 4> parse_roi(const std::string& s) {
  std::array<int, 4> v{};
  char sep = 0;
  std::istringstream in(s);
  if (!(in >> v[0] >> sep >> v[1] >> sep >> v[2] >> sep >> v[3]) || v[2] < 1 || v[3] < 1) {
    throw UsageError("roi must look like x,y,w,h, got '" + s + "'");
  }
  return v;
}

Json read_json(const fs::path& p) {
  try {
    return Json::parse(read_text(p));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, p.string() + ": " + e.what());
  }
}

bool is_pfm(const fs::path& p) { return p.extension() == ".pfm" || p.extension() == ".PFM"; }

Image read_image(const fs::path& p) { return is_pfm(p) ? read_pfm(p) : read_png(p); }

void write_image(const fs::path& p, const Image& img) {
  if (is_pfm(p)) {
    write_pfm(p, img);
  } else {
    write_png16(p, img.clamped01());
  }
}

fs::path sidecar(const fs::path& p) { return fs::path(p.string() + ".json"); }

std::string cell_name(const char* prefix, int r, int c, int ch, const char* ext) {
  char buf[96];
  if (ch < 0) {
    std::snprintf(buf, sizeof(buf), "%s_r%02d_c%02d.%s", prefix, r, c, ext);
  } else {
    std::snprintf(buf, sizeof(buf), "%s_r%02d_c%02d_ch%d.%s", prefix, r, c, ch, ext);
  }
  return buf;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

fs::path field_dir(const fs::path& p) {
  if (fs::exists(p / "index.json")) return p;
  if (fs::exists(p / "psf_field" / "index.json")) return p / "psf_field";
  fail(ErrorCode::kIo, "no PSF field index under " + p.string());
}

// --- subcommands -----------------------------------------------------------

struct RenderOpts {
  std::string spec;
  std::string affine;
  std::string out;
};

void cmd_render(const RenderOpts& o, std::ostream& out) {
  const CircleGridSpec spec = grid_spec_from_json(read_json(o.spec));
  const AffinePerturbation xf = o.affine.empty() ? AffinePerturbation::identity() : affine_from_json(read_json(o.affine));
  std::vector<std::string> warnings;
  const Image chart = render_chart(spec, xf, &warnings);
  write_png16(o.out, chart);
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  out << "wrote " << o.out << " (" << chart.width() << "x" << chart.height() << ")\n";
}

struct SimulateOpts {
  std::string chart;
  std::string aberration;
  std::string noise;
  std::string cfa = "RGGB";
  std::string out;
  std::string gt;
  std::string grid = "11x17";
  std::string rgb_out;
  std::string sharp_out;
  std::optional<std::uint64_t> seed;
};

void cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  const auto [rows, cols] = parse_grid(o.grid);
  const CfaPattern cfa = parse_cfa(o.cfa);
  Image chart = read_png(o.chart);
  if (chart.channels() == 1) chart = Image::merge({chart, chart, chart});
  require(chart.channels() == 3, "chart must be gray or RGB");
  AberrationSpec lens = o.aberration.empty() ? AberrationSpec::default_lens() : aberration_from_json(read_json(o.aberration));
  if (o.seed) lens.seed = *o.seed;
  const PsfField truth = synth_field(lens, rows, cols, 3, chart.width(), chart.height());
  Image img = blur_field(chart, truth);
  if (!o.noise.empty()) {
    NoiseSpec n = noise_from_json(read_json(o.noise));
    if (o.seed) n.seed = *o.seed;
    img = add_noise(img, n);
  }
  const RawMosaic raw = mosaic(img, cfa);
  write_raw(o.out, raw);
  if (!o.gt.empty()) write_psf_field(o.gt, truth);
  if (!o.rgb_out.empty()) write_image(o.rgb_out, demosaic_bilinear(raw));
  if (!o.sharp_out.empty()) write_image(o.sharp_out, chart);
  out << "wrote " << o.out << " (" << raw.width << "x" << raw.height << ", " << cfa_name(cfa) << ")\n";
}

struct CalibrateOpts {
  std::string input;
  std::string grid = "11x17";
  std::string config;
  std::string out;
  std::string cfa;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
};

void cmd_calibrate(const CalibrateOpts& o, std::ostream& out, std::ostream& err) {
  const auto [rows, cols] = parse_grid(o.grid);
  OptimConfig cfg = o.config.empty() ? OptimConfig{} : optim_config_from_json(read_json(o.config));
  if (o.seed) cfg.seed = *o.seed;
  Image img;
  if (fs::exists(sidecar(o.input))) {
    const RawMosaic raw = read_raw(o.input);
    cfg.cfa = raw.pattern;
    img = demosaic_bilinear(raw);
  } else {
    img = read_image(o.input);
    if (!o.cfa.empty()) cfg.cfa = parse_cfa(o.cfa);
  }
  const int jobs = o.jobs > 0 ? o.jobs : std::max(1U, std::thread::hardware_concurrency());
  if (log_info()) err << "calibrating " << rows << "x" << cols << " cells, " << img.channels() << " channel(s), "
                      << jobs << " job(s)\n";
  const FieldCalibration fc = calibrate_field(img, rows, cols, cfg, jobs);

  const fs::path dir(o.out);
  write_psf_field(dir, fc.field);
  fs::create_directories(dir / "latents");
  fs::create_directories(dir / "traces");
  const int channels = fc.field.channels();
  Json cells = Json::array();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        const auto& res = fc.results[static_cast<std::size_t>((r * cols + c) * channels + ch)];
        if (!res) continue;
        write_pfm(dir / "latents" / cell_name("latent", r, c, ch, "pfm"), res->latent);
        std::string csv = "iteration,loss\n";
        for (std::size_t i = 0; i < res->loss_trace.size(); ++i) csv += std::to_string(i) + "," + fmt(res->loss_trace[i]) + "\n";
        write_text(dir / "traces" / cell_name("loss", r, c, ch, "csv"), csv);
        cells.push_back({{"row", r},
                         {"col", c},
                         {"channel", ch},
                         {"final_fidelity", res->final_fidelity},
                         {"final_gradient_loss", res->final_gradient_loss},
                         {"dark_level", res->dark_level},
                         {"bright_level", res->bright_level}});
      }
    }
  }
  Json failures = Json::array();
  for (const auto& f : fc.failures) {
    failures.push_back({{"row", f.row}, {"col", f.col}, {"channel", f.channel}, {"code", f.code}, {"message", f.message}});
  }
  const Json diag = {{"config", to_json(cfg)}, {"grid", {rows, cols}}, {"cells", cells}, {"failures", failures}};
  write_text(dir / "diagnostics.json", dump(diag));
  out << "calibrated " << rows * cols * channels - static_cast<int>(fc.failures.size()) << " of " << rows * cols * channels
      << " kernels into " << o.out << "\n";
}

struct EvaluateOpts {
  std::string est;
  std::string gt;
  std::string out;
};

void cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
  const PsfField est = read_psf_field(field_dir(o.est));
  const PsfField gt = read_psf_field(field_dir(o.gt));
  const std::vector<CellScore> scores = score_field(est, gt);
  std::string csv = "row,col,channel,psnr_db,ssim\n";
  double sp = 0.0;
  double ss = 0.0;
  for (const auto& s : scores) {
    csv += std::to_string(s.row) + "," + std::to_string(s.col) + "," + std::to_string(s.channel) + "," + fmt(s.psnr) +
           "," + fmt(s.ssim) + "\n";
    sp += s.psnr;
    ss += s.ssim;
  }
  const double n = scores.empty() ? 1.0 : static_cast<double>(scores.size());
  csv += "mean,,," + fmt(sp / n) + "," + fmt(ss / n) + "\n";
  write_text(o.out, csv);
  out << "scored " << scores.size() << " kernels: mean PSNR " << fmt(sp / n) << " dB, mean SSIM " << fmt(ss / n) << "\n";
}

struct MtfOpts {
  std::string kernels;
  std::string out;
  int n_freq = 65;
};

const Rgb kChannelColor[3] = {{0.85, 0.1, 0.1}, {0.1, 0.6, 0.1}, {0.1, 0.2, 0.85}};

void cmd_mtf(const MtfOpts& o, std::ostream& out) {
  require(o.n_freq >= 2, "n-freq must be at least 2");
  const PsfField field = read_psf_field(field_dir(o.kernels));
  const fs::path dir(o.out);
  fs::create_directories(dir);
  int written = 0;
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      std::vector<std::vector<MtfCurve>> curves(static_cast<std::size_t>(field.channels()));
      std::vector<PlotSeries> series;
      std::string header = "frequency";
      for (int ch = 0; ch < field.channels(); ++ch) {
        header += ",ch" + std::to_string(ch) + "_0deg,ch" + std::to_string(ch) + "_90deg";
        const auto& k = field.at(r, c, ch);
        if (!k) continue;
        curves[static_cast<std::size_t>(ch)] = mtf_from_psf(*k, o.n_freq);
        const Rgb col = kChannelColor[ch % 3];
        series.push_back({curves[static_cast<std::size_t>(ch)][0], col});
        series.push_back({curves[static_cast<std::size_t>(ch)][1], {0.5 + 0.5 * col[0], 0.5 + 0.5 * col[1], 0.5 + 0.5 * col[2]}});
      }
      std::string csv = header + "\n";
      for (int i = 0; i < o.n_freq; ++i) {
        csv += fmt(0.5 * i / (o.n_freq - 1));
        for (const auto& cc : curves) {
          if (cc.empty()) {
            csv += ",,";
          } else {
            csv += "," + fmt(cc[0].modulation[static_cast<std::size_t>(i)]) + "," +
                   fmt(cc[1].modulation[static_cast<std::size_t>(i)]);
          }
        }
        csv += "\n";
      }
      write_text(dir / cell_name("mtf", r, c, -1, "csv"), csv);
      write_png8(dir / cell_name("mtf", r, c, -1, "png"), mtf_plot(series));
      ++written;
    }
  }
  out << "wrote MTF tables and plots for " << written << " field positions into " << o.out << "\n";
}

struct SfrOpts {
  std::string image;
  std::string roi;
  double angle = 5.0;
  int channel = -1;
  std::string out;
};

void cmd_sfr(const SfrOpts& o, std::ostream& out) {
  const auto roi = parse_roi(o.roi);
  const Image img = read_image(o.image);
  const int ch = o.channel >= 0 ? o.channel : (img.channels() == 3 ? 1 : 0);
  require(ch < img.channels(), "channel out of range");
  require(roi[0] >= 0 && roi[1] >= 0 && roi[0] + roi[2] <= img.width() && roi[1] + roi[3] <= img.height(),
          "roi lies outside the image");
  const Image patch = img.channel(ch).crop(roi[0], roi[1], roi[2], roi[3]);
  const SfrResult res = slanted_edge_sfr(patch, o.angle * std::numbers::pi / 180.0);
  std::string csv = "frequency,modulation\n";
  for (std::size_t i = 0; i < res.curve.frequencies.size(); ++i) {
    csv += fmt(res.curve.frequencies[i]) + "," + fmt(res.curve.modulation[i]) + "\n";
  }
  write_text(o.out, csv);
  const Json summary = {{"edge_angle_deg", res.edge_angle * 180.0 / std::numbers::pi}, {"warnings", res.warnings}};
  out << summary.dump() << "\n";
}

struct DeblurOpts {
  std::string image;
  std::string kernels;
  double nsr = 1e-3;
  std::string out;
};

void cmd_deblur(const DeblurOpts& o, std::ostream& out) {
  const Image img = read_image(o.image);
  const PsfField field = read_psf_field(field_dir(o.kernels));
  const Image restored = wiener_deblur(img, field, o.nsr);
  write_image(o.out, restored);
  out << "wrote " << o.out << "\n";
}

struct ReportOpts {
  std::string run;
  std::string out;
};

std::string html_escape(const std::string& s) {
  std::string r;
  for (char ch : s) {
    switch (ch) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += ch;
    }
  }
  return r;
}

std::string csv_table(const std::string& csv) {
  std::string html = "<table>";
  std::istringstream in(csv);
  std::string line;
  bool head = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    html += head ? "<tr class=\"h\">" : (line.rfind("mean", 0) == 0 ? "<tr class=\"s\">" : "<tr>");
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) html += (head ? "<th>" : "<td>") + html_escape(cell) + (head ? "</th>" : "</td>");
    html += "</tr>";
    head = false;
  }
  return html + "</table>";
}

std::string inline_png(const Image& rgb, const std::string& alt) {
  return "<img alt=\"" + html_escape(alt) + "\" src=\"data:image/png;base64," + base64(encode_png8(rgb)) + "\"/>";
}

void cmd_report(const ReportOpts& o, std::ostream& out) {
  const fs::path run(o.run);
  const PsfField est = read_psf_field(field_dir(run));
  std::optional<PsfField> gt;
  if (fs::exists(run / "gt" / "index.json")) gt = read_psf_field(run / "gt");

  std::string html =
      "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><title>PSF calibration report</title><style>"
      "body{font-family:sans-serif;margin:24px;color:#222}h2{margin-top:32px}"
      "table{border-collapse:collapse;font-size:12px}td,th{border:1px solid #ccc;padding:2px 6px;text-align:right}"
      "tr.h{background:#eee}tr.s{font-weight:bold;background:#f6f0d8}.fig{display:inline-block;margin:6px;"
      "vertical-align:top;font-size:12px}</style></head><body>";
  html += "<h1>PSF calibration report</h1>";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "<p>%d x %d field positions, %d channel(s), image %d x %d, %zu hole(s).</p>",
                est.grid_rows(), est.grid_cols(), est.channels(), est.image_width(), est.image_height(),
                est.hole_count());
  html += buf;

  const int scale = std::max(1, 64 / std::max(1, est.kernel_for(0, 0, 0).side()));
  html += "<h2>Kernel heatmaps</h2>";
  static const char* names[3] = {"R", "G", "B"};
  for (int ch = 0; ch < est.channels(); ++ch) {
    const std::string label = est.channels() == 3 ? names[ch] : "gray";
    html += "<div class=\"fig\">" + inline_png(field_heatmap(est, ch, scale), "estimated " + label) +
            "<br/>estimated, " + label + "</div>";
    if (gt && ch < gt->channels()) {
      html += "<div class=\"fig\">" + inline_png(field_heatmap(*gt, ch, scale), "ground truth " + label) +
              "<br/>ground truth, " + label + "</div>";
    }
  }

  html += "<h2>MTF</h2><p>Solid: estimated kernels. Faded: ground truth where available. 0&deg; slices.</p>";
  std::vector<std::pair<int, int>> picks;
  for (int r : {0, est.grid_rows() / 2, est.grid_rows() - 1}) {
    for (int c : {0, est.grid_cols() / 2, est.grid_cols() - 1}) {
      if (std::find(picks.begin(), picks.end(), std::make_pair(r, c)) == picks.end()) picks.emplace_back(r, c);
    }
  }
  for (const auto& [r, c] : picks) {
    std::vector<PlotSeries> series;
    std::vector<std::string> labels;
    for (int ch = 0; ch < est.channels(); ++ch) {
      const Rgb col = kChannelColor[est.channels() == 3 ? ch : 1];
      if (const auto& k = est.at(r, c, ch)) {
        series.push_back({mtf_from_psf(*k)[0], col});
        labels.push_back(std::string(est.channels() == 3 ? names[ch] : "gray") + " est");
      }
      if (gt && ch < gt->channels()) {
        if (const auto& k = gt->at(r, c, ch)) {
          series.push_back({mtf_from_psf(*k)[0], {0.55 + 0.45 * col[0], 0.55 + 0.45 * col[1], 0.55 + 0.45 * col[2]}});
          labels.push_back(std::string(est.channels() == 3 ? names[ch] : "gray") + " gt");
        }
      }
    }
    std::snprintf(buf, sizeof(buf), "<div class=\"fig\">row %d, col %d<br/>", r, c);
    html += buf + mtf_svg(series, labels) + "</div>";
  }

  if (fs::exists(run / "scores.csv")) {
    html += "<h2>Kernel scores</h2>" + csv_table(read_text(run / "scores.csv"));
  }
  if (fs::exists(field_dir(run) / "diagnostics.json")) {
    const Json diag = read_json(field_dir(run) / "diagnostics.json");
    if (diag.contains("failures") && !diag["failures"].empty()) {
      html += "<h2>Failed cells</h2><table><tr class=\"h\"><th>row</th><th>col</th><th>channel</th><th>code</th><th>message</th></tr>";
      for (const auto& f : diag["failures"]) {
        html += "<tr><td>" + std::to_string(f.value("row", 0)) + "</td><td>" + std::to_string(f.value("col", 0)) +
                "</td><td>" + std::to_string(f.value("channel", 0)) + "</td><td>" +
                html_escape(f.value("code", std::string())) + "</td><td>" +
                html_escape(f.value("message", std::string())) + "</td></tr>";
      }
      html += "</table>";
    }
    if (diag.contains("config")) html += "<h2>Configuration</h2><pre>" + html_escape(diag["config"].dump(2)) + "</pre>";
  }
  html += "</body></html>\n";
  write_text(o.out, html);
  out << "wrote " << o.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatially varying PSF calibration from circle-grid captures", "circleflow"};
  app.require_subcommand(1);

  RenderOpts ro;
  auto* render = app.add_subcommand("render-chart", "Render a circle-grid chart to a 16-bit PNG");
  render->add_option("--spec", ro.spec, "chart spec JSON")->required();
  render->add_option("--affine", ro.affine, "affine perturbation JSON");
  render->add_option("--out", ro.out, "output PNG")->required();

  SimulateOpts so;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Blur, add noise and Bayer-sample a chart");
  simulate->add_option("--chart", so.chart, "chart PNG")->required();
  simulate->add_option("--aberration", so.aberration, "aberration spec JSON (default lens if omitted)");
  simulate->add_option("--noise", so.noise, "noise spec JSON (noiseless if omitted)");
  simulate->add_option("--cfa", so.cfa, "CFA pattern")->capture_default_str();
  simulate->add_option("--grid", so.grid, "ground-truth field grid, ROWSxCOLS")->capture_default_str();
  simulate->add_option("--out", so.out, "raw mosaic PNG (pattern goes to a .json sidecar)")->required();
  simulate->add_option("--gt-kernels", so.gt, "directory for the ground-truth PSF field");
  simulate->add_option("--rgb-out", so.rgb_out, "also write the demosaiced capture");
  simulate->add_option("--sharp-out", so.sharp_out, "also write the sharp RGB chart");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "overrides the noise and lens seeds");

  CalibrateOpts co;
  std::uint64_t cal_seed = 0;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate a PSF field from a capture");
  calibrate->add_option("--input", co.input, "raw mosaic (with sidecar), RGB or gray image")->required();
  calibrate->add_option("--grid", co.grid, "ROWSxCOLS")->capture_default_str();
  calibrate->add_option("--config", co.config, "optimizer config JSON");
  calibrate->add_option("--cfa", co.cfa, "CFA pattern of a demosaiced RGB input");
  calibrate->add_option("--out", co.out, "output directory")->required();
  calibrate->add_option("--jobs", co.jobs, "worker threads (0 = logical cores)");
  auto* cal_seed_opt = calibrate->add_option("--seed", cal_seed, "overrides the config seed");

  EvaluateOpts eo;
  auto* evaluate = app.add_subcommand("evaluate", "Score an estimated field against ground truth");
  evaluate->add_option("--est", eo.est, "estimated PSF field directory")->required();
  evaluate->add_option("--gt", eo.gt, "ground-truth PSF field directory")->required();
  evaluate->add_option("--out", eo.out, "scores CSV")->required();

  MtfOpts mo;
  auto* mtf = app.add_subcommand("mtf", "MTF tables and plots for every field position");
  mtf->add_option("--kernels", mo.kernels, "PSF field directory")->required();
  mtf->add_option("--out", mo.out, "output directory")->required();
  mtf->add_option("--n-freq", mo.n_freq, "frequency samples from 0 to Nyquist")->capture_default_str();

  SfrOpts fo;
  auto* sfr = app.add_subcommand("sfr", "Slanted-edge SFR of one image region");
  sfr->add_option("--image", fo.image, "PNG or PFM image")->required();
  sfr->add_option("--roi", fo.roi, "x,y,w,h")->required();
  sfr->add_option("--angle", fo.angle, "nominal edge angle from vertical, degrees")->capture_default_str();
  sfr->add_option("--channel", fo.channel, "channel to analyse (default green, or the only one)");
  sfr->add_option("--out", fo.out, "output CSV")->required();

  DeblurOpts dbo;
  auto* deblur = app.add_subcommand("deblur", "Wiener restoration with a PSF field");
  deblur->add_option("--image", dbo.image, "blurred PNG or PFM image")->required();
  deblur->add_option("--kernels", dbo.kernels, "PSF field directory")->required();
  deblur->add_option("--nsr", dbo.nsr, "noise-to-signal ratio")->capture_default_str();
  deblur->add_option("--out", dbo.out, "restored image (PNG or PFM)")->required();

  ReportOpts rpo;
  auto* report = app.add_subcommand("report", "Single-file HTML summary of a run directory");
  report->add_option("--run", rpo.run, "run directory (psf_field/ or index.json, optional gt/ and scores.csv)")->required();
  report->add_option("--out", rpo.out, "output HTML")->required();

  std::vector<const char*> argv{"circleflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*render) cmd_render(ro, out);
    if (*simulate) {
      if (*sim_seed_opt) so.seed = sim_seed;
      cmd_simulate(so, out);
    }
    if (*calibrate) {
      if (*cal_seed_opt) co.seed = cal_seed;
      cmd_calibrate(co, out, err);
    }
    if (*evaluate) cmd_evaluate(eo, out);
    if (*mtf) cmd_mtf(mo, out);
    if (*sfr) cmd_sfr(fo, out);
    if (*deblur) cmd_deblur(dbo, out);
    if (*report) cmd_report(rpo, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << Json{{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << Json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace circleflow::cli
