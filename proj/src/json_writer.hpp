#pragma once

#include <string>

#include <json.hpp>

namespace stochq::detail {

// Deterministic JSON text: insertion-ordered keys, floats in fixed scientific
// notation with 12 significant digits, non-finite floats as null.
std::string stable_json(const nlohmann::ordered_json& value, int indent = 2);

}  // namespace stochq::detail
