#pragma once

// Named scenarios shipped with the tool. The sources live in presets/*.ini
// and are compiled in by the build (rsp/preset_data.hpp is generated).

#include <optional>
#include <string>
#include <vector>

#include "rsp/preset_data.hpp"
#include "rsp/scenario.hpp"

namespace rsp::cli {

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::preset_sources()) out.push_back(name);
  return out;
}

inline std::optional<std::string> preset_source(const std::string& name) {
  for (const auto& [n, text] : detail::preset_sources()) {
    if (n == name) return text;
  }
  return std::nullopt;
}

inline ScenarioConfig load_preset(const std::string& name) {
  const auto text = preset_source(name);
  if (!text) throw SchemaError("unknown preset \"" + name + "\"");
  return parse_scenario(*text);
}

}  // namespace rsp::cli
