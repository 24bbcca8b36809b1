#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "fluctgeo/families.hpp"

namespace fluctgeo {

using AnyFamily = std::variant<Family1D, ProductFamily>;

/// Parses the family description schema:
///   {"type":"normal","mu":..,"sigma":..}
///   {"type":"mixture","components":[{"weight":..,"mu":..,"sigma":..},...]}
///   {"type":"triangle","a":..}
///   {"type":"uniform","lo":..,"hi":..}
///   {"type":"expfam","theta":[..,..]}        (gaussian natural coordinates)
///   {"type":"product","factors":[spec,...]}
/// Unknown fields are rejected. Throws std::invalid_argument on any problem.
AnyFamily parse_family_json(const nlohmann::json& j);

/// Accepts either "builtin:<name>" (a corpus entry) or inline JSON.
AnyFamily parse_family_string(const std::string& text);

}  // namespace fluctgeo
