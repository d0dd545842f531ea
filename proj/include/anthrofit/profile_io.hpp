#pragma once

#include "anthrofit/measurement.hpp"

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace anthrofit {

using ordered_json = nlohmann::ordered_json;

// Profile files are a JSON array of spec objects with 0-based indices:
// { "name", "type": "euclidean"|"geodesic"|"circumference", "a", "b",
//   "anchor", "normal": [x,y,z], "region": [triangle indices], "group" }.
ordered_json profile_to_json(const MeasurementProfile& profile);
MeasurementProfile profile_from_json(const ordered_json& array);

MeasurementProfile read_profile(const std::string& path);
void write_profile(const std::string& path, const MeasurementProfile& profile);

}  // namespace anthrofit
