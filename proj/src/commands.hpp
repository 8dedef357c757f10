#pragma once

#include "hlv/averaging.hpp"
#include "hlv/model.hpp"
#include "hlv/resonance.hpp"
#include "hlv/star.hpp"

#include <json.hpp>

#include <string>

namespace hlv::cmd {

using json = nlohmann::json;

struct Result {
  json report;
  json tables = json::array();
  json files = json::array();
  bool negative = false;
};

Result run(const std::string& command, const json& cfg);

// Parsers shared with the handle-based API; errors name the offending field.
InteractionSystem parse_system(const json& j);
StarSystem parse_star(const json& j);
json orbit_json(const OrbitClass& oc);

}  // namespace hlv::cmd
