#pragma once

#include <json.hpp>

#include "fluxlab/freefermion.hpp"

namespace fluxlab {

using Json = nlohmann::json;

/// Model definition files: lattice {d, L}, kind, per-site charges, and a
/// term list referencing named builders. Generic spin-block / monomial
/// forms are emitted on save so that load(save(m)) reproduces the model.
Json save_model(const ModelSystem& model);
ModelSystem load_model(const Json& j);

bool is_one_particle_file(const Json& j);
OneParticleModel load_one_particle(const Json& j);
Json save_one_particle(const OneParticleModel& model);

}  // namespace fluxlab
