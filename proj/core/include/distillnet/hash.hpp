#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "distillnet/models/network.hpp"

namespace distillnet {

std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_hex(std::span<const float> values);
std::string sha256_file(const std::filesystem::path& path);

/// Hash of the exact bit patterns of every parameter in order.
std::string params_sha256(const models::ParamSet& params);

}  // namespace distillnet
