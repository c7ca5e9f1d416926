#pragma once

#include <string>

#include <json.hpp>

#include "pcvx/domain.hpp"

namespace pcvx {

/// Domain document:
///   {"dimension": n, "bounding_radius": R, "tree": node}
///   {"catalog": name, "params": {...}}
/// node = {"field": "formula"} | {"union": [node...]} | {"intersection": [node...]}
///      | {"complement": node}
///      | {"minus_affine": node, "base": [c...], "span": [[c...]...]}
/// where a complex number c is a number or [re, im]. Errors name the JSON
/// path and, for formulas, the position inside the formula.
DomainSpec domain_from_json(const nlohmann::json& doc);

/// Reads a domain file, or, when `source` is not an existing file, a
/// catalog reference "name:key=value,...".
DomainSpec load_domain(const std::string& source);

/// Self-describing summary: name, parameters, dimension, radius and the
/// exact formulas evaluated.
nlohmann::json domain_summary(const DomainSpec& spec);

}  // namespace pcvx
