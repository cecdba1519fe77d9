#pragma once

#include <string>

#include <json.hpp>

#include "fsr/multicurve.hpp"
#include "fsr/subdivision.hpp"

namespace fsr {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// Sorted keys, two-space indent, floats as %.12g.
std::string canonical_dump(const Json& j);

Json complex_to_json(const SphereComplex& cx);
SphereComplex complex_from_json(const Json& j);

Json rule_to_json(const SubdivisionRule& rule);
// Throws a validation error on schema problems; does not run validate_rule.
SubdivisionRule rule_from_json(const Json& j);

Json multicurve_to_json(const MulticurveSpec& mc);
MulticurveSpec multicurve_from_json(const Json& j);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
Json parse_json_text(const std::string& text);

// A path to a rule file, or "catalog:<name>".
SubdivisionRule load_rule(const std::string& source);

}  // namespace fsr
