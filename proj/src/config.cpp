#include "mixlab/config.hpp"

#include <charconv>

#include "mixlab/error.hpp"

namespace mixlab {

void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<const char*> allowed,
                         const std::string& context) {
  if (!doc.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

QuadSpec quad_spec_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc, {"rel_tol", "abs_tol", "tail_radius_multiplier", "max_subdivisions"}, "quad");
  QuadSpec spec;
  try {
    if (doc.contains("rel_tol")) spec.rel_tol = doc.at("rel_tol").get<double>();
    if (doc.contains("abs_tol")) spec.abs_tol = doc.at("abs_tol").get<double>();
    if (doc.contains("tail_radius_multiplier")) spec.tail_radius_multiplier = doc.at("tail_radius_multiplier").get<double>();
    if (doc.contains("max_subdivisions")) spec.max_subdivisions = doc.at("max_subdivisions").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("quad: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("quad: ") + e.what());
  }
  return spec;
}

nlohmann::json to_json(const QuadSpec& spec) {
  return {{"rel_tol", spec.rel_tol},
          {"abs_tol", spec.abs_tol},
          {"tail_radius_multiplier", spec.tail_radius_multiplier},
          {"max_subdivisions", spec.max_subdivisions}};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace mixlab
