#pragma once

#include <json.hpp>

#include "distillnet/models/architecture.hpp"

namespace distillnet::detail {

nlohmann::json spec_json(const models::ArchitectureSpec& spec);
models::ArchitectureSpec spec_from(const nlohmann::json& j);

}  // namespace distillnet::detail
