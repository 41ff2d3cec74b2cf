#pragma once

#include <filesystem>

#include "circleflow/chart.hpp"
#include "circleflow/image.hpp"
#include "circleflow/optics_sim.hpp"
#include "circleflow/optim.hpp"
#include "circleflow/psf_field.hpp"
#include "json.hpp"

namespace circleflow {

using Json = nlohmann::json;

// Missing keys keep their defaults; unknown keys are rejected so typos in
// config files surface as InvalidInput.
Json to_json(const CircleGridSpec& s);
CircleGridSpec grid_spec_from_json(const Json& j);

Json to_json(const AffinePerturbation& a);
AffinePerturbation affine_from_json(const Json& j);

Json to_json(const AberrationSpec& s);
AberrationSpec aberration_from_json(const Json& j);

Json to_json(const NoiseSpec& s);
NoiseSpec noise_from_json(const Json& j);

Json to_json(const OptimConfig& c);
OptimConfig optim_config_from_json(const Json& j);

// {"side": n, "data": [row-major weights]}
Json to_json(const Kernel& k);
Kernel kernel_from_json(const Json& j);

// Directory layout: index.json plus one kernel JSON per calibrated cell and
// channel; holes are null entries in the index.
void write_psf_field(const std::filesystem::path& dir, const PsfField& field);
PsfField read_psf_field(const std::filesystem::path& dir);

// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace circleflow
