#pragma once

#include <json.hpp>

#include "pnp/energy.hpp"
#include "pnp/radio.hpp"

namespace pnp {

void to_json(nlohmann::json& j, const RadioParams& p);
void from_json(const nlohmann::json& j, RadioParams& p);
void to_json(nlohmann::json& j, const EnergyParams& p);
void from_json(const nlohmann::json& j, EnergyParams& p);

}  // namespace pnp
