#ifndef LLGEO_SCENARIO_IO_HPP
#define LLGEO_SCENARIO_IO_HPP

#include <string>

#include "llgeo/scenario.hpp"

namespace llgeo {

// Scenario config is a JSON document; lines whose first non-blank character
// is '#' are stripped before parsing so configs can carry comments.
Scenario parse_scenario_json(const std::string& text);
Scenario load_scenario(const std::string& path);

std::string scenario_to_json(const Scenario& sc);
void save_scenario(const std::string& path, const Scenario& sc);

}  // namespace llgeo

#endif
