#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "smalldev/env.hpp"

namespace smalldev {

// {"components":[{"kind":"lattice","spacing":1,"pmf":[[-2,0.5],[0,0.5]],"weight":0.5},
//                {"kind":"gaussian","mean":0,"variance":1,"weight":0.5}]}
std::shared_ptr<const EnvironmentModel> model_from_json(const nlohmann::json& doc);
std::shared_ptr<const EnvironmentModel> model_from_json_text(const std::string& text);
std::shared_ptr<const EnvironmentModel> load_model(const std::string& path);

nlohmann::json model_to_json(const EnvironmentModel& model);

}  // namespace smalldev
