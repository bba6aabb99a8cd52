#pragma once

// Scenario configs bundled into the binary from presets/*.ini.

#include <optional>
#include <string>
#include <vector>

namespace entfree {

std::vector<std::string> preset_names();
std::optional<std::string> preset_text(const std::string& name);

}  // namespace entfree
