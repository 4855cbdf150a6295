#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace synthweaver {

// Recovers the first balanced top-level JSON object from a model reply:
// strips code fences and surrounding prose, tolerates // and /* */ comments.
// Throws NoJsonFound.
nlohmann::json extract_json(std::string_view raw);

}  // namespace synthweaver
