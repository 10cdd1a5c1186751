#pragma once

#include <initializer_list>
#include <json.hpp>
#include <string>

#include "mixlab/quad.hpp"

namespace mixlab {

/// ConfigError naming the first key of `doc` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<const char*> allowed,
                         const std::string& context);

/// Object with any of rel_tol, abs_tol, tail_radius_multiplier, max_subdivisions.
QuadSpec quad_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const QuadSpec& spec);

/// 17 significant digits, '.' decimal.
std::string format_double(double v);

}  // namespace mixlab
