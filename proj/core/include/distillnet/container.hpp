#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace distillnet {

/// On-disk layout shared by checkpoints, feature caches and normalisation stats:
///   "DNKD" | u8 version | u64 LE header length | UTF-8 JSON header | f32 LE payload
/// The header's "payload_floats" and "payload_sha256" fields record the
/// payload length and checksum.
inline constexpr char kContainerMagic[4] = {'D', 'N', 'K', 'D'};
inline constexpr std::uint8_t kContainerVersion = 1;

struct Container {
  std::string header_json;  // includes "payload_floats"
  std::vector<float> payload;
};

/// Writes to a temporary sibling then renames over `path`. `header_json`
/// must be a JSON object; "payload_floats" and "payload_sha256" are filled in.
void write_container(const std::filesystem::path& path, const std::string& header_json,
                     std::span<const float> payload);

/// Throws ContainerError with a kind naming the failure.
Container read_container(const std::filesystem::path& path);

}  // namespace distillnet
