#include "circleflow/serialization.hpp"

#include <cstdio>
#include <set>

#include "circleflow/error.hpp"
#include "circleflow/io.hpp"

namespace circleflow {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  require(j.is_object(), std::string(what) + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (ok.count(key) == 0) fail(ErrorCode::kInvalidInput, std::string("unknown key '") + key + "' in " + what);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, std::string("bad value for '") + key + "': " + e.what());
  }
}

Json poly_json(const FieldPoly& p) {
  if (p.is_constant()) return p.c[0];
  return Json(p.c);
}

FieldPoly poly_from(const Json& j) {
  FieldPoly p;
  if (j.is_number()) {
    p.c[0] = j.get<double>();
  } else {
    require(j.is_array() && j.size() == 6, "field polynomial must be a number or 6 coefficients");
    for (std::size_t i = 0; i < 6; ++i) p.c[i] = j[i].get<double>();
  }
  return p;
}

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const CircleGridSpec& s) {
  return {{"rows", s.rows},         {"cols", s.cols},       {"pitch", s.pitch},
          {"radius", s.radius},     {"dark_level", s.dark_level}, {"bright_level", s.bright_level},
          {"margin", s.margin},     {"supersample", s.supersample}, {"width", s.width},
          {"height", s.height}};
}

CircleGridSpec grid_spec_from_json(const Json& j) {
  check_keys(j, {"rows", "cols", "pitch", "radius", "dark_level", "bright_level", "margin", "supersample", "width",
                 "height"},
             "chart spec");
  CircleGridSpec s;
  read(j, "rows", s.rows);
  read(j, "cols", s.cols);
  read(j, "pitch", s.pitch);
  read(j, "radius", s.radius);
  read(j, "dark_level", s.dark_level);
  read(j, "bright_level", s.bright_level);
  read(j, "margin", s.margin);
  read(j, "supersample", s.supersample);
  read(j, "width", s.width);
  read(j, "height", s.height);
  s.validate();
  return s;
}

Json to_json(const AffinePerturbation& a) { return {{"matrix", a.m}}; }

AffinePerturbation affine_from_json(const Json& j) {
  check_keys(j, {"matrix"}, "affine");
  AffinePerturbation a;
  read(j, "matrix", a.m);
  a.validate();
  return a;
}

Json to_json(const AberrationSpec& s) {
  Json comps = Json::array();
  for (const auto& g : s.components) {
    comps.push_back({{"amplitude", poly_json(g.amplitude)},
                     {"offset_x", poly_json(g.offset_x)},
                     {"offset_y", poly_json(g.offset_y)},
                     {"cov_xx", poly_json(g.cov_xx)},
                     {"cov_xy", poly_json(g.cov_xy)},
                     {"cov_yy", poly_json(g.cov_yy)}});
  }
  return {{"side", s.side},
          {"seed", s.seed},
          {"channel_scale", s.channel_scale},
          {"center_on_centroid", s.center_on_centroid},
          {"components", comps}};
}

AberrationSpec aberration_from_json(const Json& j) {
  check_keys(j, {"side", "seed", "channel_scale", "center_on_centroid", "components"}, "aberration spec");
  AberrationSpec s = AberrationSpec::default_lens();
  read(j, "side", s.side);
  read(j, "seed", s.seed);
  read(j, "channel_scale", s.channel_scale);
  read(j, "center_on_centroid", s.center_on_centroid);
  if (j.contains("components")) {
    s.components.clear();
    for (const auto& c : j.at("components")) {
      check_keys(c, {"amplitude", "offset_x", "offset_y", "cov_xx", "cov_xy", "cov_yy"}, "mixture component");
      GaussianComponent g;
      if (c.contains("amplitude")) g.amplitude = poly_from(c["amplitude"]);
      if (c.contains("offset_x")) g.offset_x = poly_from(c["offset_x"]);
      if (c.contains("offset_y")) g.offset_y = poly_from(c["offset_y"]);
      if (c.contains("cov_xx")) g.cov_xx = poly_from(c["cov_xx"]);
      if (c.contains("cov_xy")) g.cov_xy = poly_from(c["cov_xy"]);
      if (c.contains("cov_yy")) g.cov_yy = poly_from(c["cov_yy"]);
      s.components.push_back(g);
    }
  }
  s.validate();
  return s;
}

Json to_json(const NoiseSpec& s) {
  return {{"gaussian_var", s.gaussian_var}, {"poisson_scale", s.poisson_scale}, {"seed", s.seed}};
}

NoiseSpec noise_from_json(const Json& j) {
  check_keys(j, {"gaussian_var", "poisson_scale", "seed"}, "noise spec");
  NoiseSpec s;
  read(j, "gaussian_var", s.gaussian_var);
  read(j, "poisson_scale", s.poisson_scale);
  read(j, "seed", s.seed);
  s.validate();
  return s;
}

Json to_json(const OptimConfig& c) {
  return {{"kernel_side", c.kernel_side},
          {"pyramid_levels", c.pyramid_levels},
          {"flow_coarsening", c.flow_coarsening},
          {"iterations", c.iterations},
          {"flow_step", c.flow_step},
          {"kernel_step", c.kernel_step},
          {"mlp_step", c.mlp_step},
          {"step_decay", c.step_decay},
          {"grad_weight", c.grad_weight},
          {"smooth_weight", c.smooth_weight},
          {"smooth_anneal", c.smooth_anneal},
          {"center_weight", c.center_weight},
          {"kernel_smooth_weight", c.kernel_smooth_weight},
          {"kernel_init_sigma", c.kernel_init_sigma},
          {"parameterization", c.parameterization == Parameterization::kCoordMlp ? "coord-mlp" : "logit-grid"},
          {"mlp_hidden", c.mlp_hidden},
          {"mlp_omega0", c.mlp_omega0},
          {"morph_radius", c.morph_radius},
          {"proxy_supersample", c.proxy_supersample},
          {"proxy_offset_x", c.proxy_offset_x},
          {"proxy_offset_y", c.proxy_offset_y},
          {"use_flow", c.use_flow},
          {"demosaic_aware", c.demosaic_aware},
          {"use_circle_chart", c.use_circle_chart},
          {"cfa", std::string(cfa_name(c.cfa))},
          {"seed", c.seed}};
}

OptimConfig optim_config_from_json(const Json& j) {
  check_keys(j, {"kernel_side", "pyramid_levels", "flow_coarsening", "iterations", "flow_step", "kernel_step", "mlp_step", "step_decay",
                 "grad_weight", "smooth_weight", "smooth_anneal", "center_weight", "kernel_smooth_weight", "kernel_init_sigma", "parameterization",
                 "mlp_hidden", "mlp_omega0", "morph_radius", "proxy_supersample", "proxy_offset_x", "proxy_offset_y", "use_flow", "demosaic_aware", "use_circle_chart", "cfa",
                 "seed"},
             "optim config");
  OptimConfig c;
  read(j, "kernel_side", c.kernel_side);
  read(j, "pyramid_levels", c.pyramid_levels);
  read(j, "flow_coarsening", c.flow_coarsening);
  read(j, "iterations", c.iterations);
  read(j, "flow_step", c.flow_step);
  read(j, "kernel_step", c.kernel_step);
  read(j, "mlp_step", c.mlp_step);
  read(j, "step_decay", c.step_decay);
  read(j, "grad_weight", c.grad_weight);
  read(j, "smooth_weight", c.smooth_weight);
  read(j, "smooth_anneal", c.smooth_anneal);
  read(j, "center_weight", c.center_weight);
  read(j, "kernel_smooth_weight", c.kernel_smooth_weight);
  read(j, "kernel_init_sigma", c.kernel_init_sigma);
  if (j.contains("parameterization")) {
    const std::string p = j["parameterization"].get<std::string>();
    if (p == "logit-grid") {
      c.parameterization = Parameterization::kLogitGrid;
    } else if (p == "coord-mlp") {
      c.parameterization = Parameterization::kCoordMlp;
    } else {
      fail(ErrorCode::kInvalidInput, "parameterization must be logit-grid or coord-mlp");
    }
  }
  read(j, "mlp_hidden", c.mlp_hidden);
  read(j, "mlp_omega0", c.mlp_omega0);
  read(j, "morph_radius", c.morph_radius);
  read(j, "proxy_supersample", c.proxy_supersample);
  read(j, "proxy_offset_x", c.proxy_offset_x);
  read(j, "proxy_offset_y", c.proxy_offset_y);
  read(j, "use_flow", c.use_flow);
  read(j, "demosaic_aware", c.demosaic_aware);
  read(j, "use_circle_chart", c.use_circle_chart);
  if (j.contains("cfa")) c.cfa = parse_cfa(j["cfa"].get<std::string>());
  read(j, "seed", c.seed);
  c.validate();
  return c;
}

Json to_json(const Kernel& k) { return {{"side", k.side()}, {"data", k.values()}}; }

Kernel kernel_from_json(const Json& j) {
  check_keys(j, {"side", "data"}, "kernel");
  int side = 0;
  std::vector<double> data;
  read(j, "side", side);
  read(j, "data", data);
  require(side >= 1 && data.size() == static_cast<std::size_t>(side) * side, "kernel JSON has inconsistent size");
  return Kernel(side, std::move(data));
}

namespace {

std::string kernel_file(int row, int col, int channel) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "kernel_r%02d_c%02d_ch%d.json", row, col, channel);
  return buf;
}

}  // namespace

void write_psf_field(const fs::path& dir, const PsfField& field) {
  fs::create_directories(dir);
  Json entries = Json::array();
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      for (int ch = 0; ch < field.channels(); ++ch) {
        const auto& k = field.at(r, c, ch);
        if (!k) {
          entries.push_back(nullptr);
          continue;
        }
        const std::string name = kernel_file(r, c, ch);
        write_text(dir / name, dump(to_json(*k)));
        entries.push_back({{"row", r}, {"col", c}, {"channel", ch}, {"file", name}});
      }
    }
  }
  const Json index = {{"grid_rows", field.grid_rows()},     {"grid_cols", field.grid_cols()},
                      {"channels", field.channels()},       {"image_width", field.image_width()},
                      {"image_height", field.image_height()}, {"kernels", entries}};
  write_text(dir / "index.json", dump(index));
}

PsfField read_psf_field(const fs::path& dir) {
  Json index;
  try {
    index = Json::parse(read_text(dir / "index.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, "malformed PSF field index: " + std::string(e.what()));
  }
  PsfField field(index.at("grid_rows").get<int>(), index.at("grid_cols").get<int>(), index.at("channels").get<int>(),
                 index.at("image_width").get<int>(), index.at("image_height").get<int>());
  for (const auto& e : index.at("kernels")) {
    if (e.is_null()) continue;
    const Json kj = Json::parse(read_text(dir / e.at("file").get<std::string>()));
    field.set(e.at("row").get<int>(), e.at("col").get<int>(), e.at("channel").get<int>(), kernel_from_json(kj));
  }
  return field;
}

}  // namespace circleflow
