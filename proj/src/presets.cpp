#include "entfree/presets.hpp"

#include <map>

namespace entfree {

const std::map<std::string, std::string>& preset_table();

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, _] : preset_table()) names.push_back(name);
    return names;
}

std::optional<std::string> preset_text(const std::string& name) {
    const auto& table = preset_table();
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace entfree
