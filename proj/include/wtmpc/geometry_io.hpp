#pragma once

// Text serialization of polytopes. The format is a JSON object with keys
// `dim`, `empty`, `F` (row-major list of rows), `g` and `vertices` (list of
// points). Doubles are written in shortest round-trip form, so a
// write/read cycle reproduces every binary64 value exactly.

#include <json.hpp>

#include <string>

#include "wtmpc/geometry.hpp"

namespace wtmpc {

nlohmann::json to_json(const Polytoped& P);
Polytoped polytope_from_json(const nlohmann::json& j);

std::string serialize(const Polytoped& P);
Polytoped deserialize_polytope(const std::string& text);

}  // namespace wtmpc
