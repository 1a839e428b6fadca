#pragma once

#include <nlohmann/json.hpp>

#include "superlambda/integrator.hpp"
#include "superlambda/meanfield.hpp"
#include "superlambda/model.hpp"

namespace superlambda {

// JSON forms used in trajectory metadata and run manifests. Non-finite
// doubles are written as null and read back as +infinity.

void to_json(nlohmann::json& j, const SystemParams& p);
void from_json(const nlohmann::json& j, SystemParams& p);

void to_json(nlohmann::json& j, const ScaledParams& s);

void to_json(nlohmann::json& j, const Tolerances& t);
void from_json(const nlohmann::json& j, Tolerances& t);

void to_json(nlohmann::json& j, const SeedPolicy& s);
void from_json(const nlohmann::json& j, SeedPolicy& s);

void to_json(nlohmann::json& j, const SolverStats& s);

std::string to_string(Method method);
Method method_from_string(const std::string& name);

} // namespace superlambda
