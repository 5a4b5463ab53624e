#pragma once

// Internal JSON helpers shared by the package parser, the trait-map overlay
// loader and the report renderer. Not installed.

#include <string>

#include "json.hpp"
#include "typesift/ir.hpp"

namespace typesift::detail {

TypeDescriptor parse_type_json(const nlohmann::json& j, const std::string& path);
nlohmann::ordered_json type_to_json(const TypeDescriptor& ty);

}  // namespace typesift::detail
