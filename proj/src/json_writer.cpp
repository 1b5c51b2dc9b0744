#include "json_writer.hpp"

#include <cmath>

#include "format.hpp"

namespace stochq::detail {

namespace {

void write(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string close(static_cast<std::size_t>(indent) * depth, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::ordered_json(it.key()).dump() + ": ";
        write(it.value(), indent, depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write(item, indent, depth + 1, out);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? sci(x) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string stable_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  write(value, indent, 0, out);
  out += '\n';
  return out;
}

}  // namespace stochq::detail
