#pragma once

#include <string_view>

#include "json.hpp"
#include "parsim/scenario.hpp"

namespace parsim::detail {

using Json = nlohmann::ordered_json;

/// Parses text and applies any "preset" base as a merge patch.
Json merged_json(std::string_view text);
ScenarioConfig config_from_json(const Json& j);

}  // namespace parsim::detail
