#pragma once

#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "flowes/driver.hpp"
#include "flowes/nice.hpp"

namespace flowes {

/// Checkpoint schema: nested records of named real arrays. Key order is
/// fixed, so equal parameters serialize to equal bytes.
nlohmann::ordered_json latent_to_json(const LatentParams& latent);
nlohmann::ordered_json flow_to_json(const FlowParams& flow);
LatentParams latent_from_json(const nlohmann::ordered_json& j);
FlowParams flow_from_json(const nlohmann::ordered_json& j);

void save_params(const LatentParams& latent, const FlowParams& flow, const std::string& path);
std::pair<LatentParams, FlowParams> load_params(const std::string& path);

/// One trajectory row as a single-line JSON object with a fixed key order.
nlohmann::ordered_json row_to_json(const GenerationRecord& row);
GenerationRecord row_from_json(const nlohmann::ordered_json& j);

}  // namespace flowes
