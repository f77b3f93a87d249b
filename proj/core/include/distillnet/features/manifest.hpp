#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace distillnet::features {

enum class Split { train, valid, test };

std::string_view to_string(Split split);
/// Throws ConfigError for anything but train/valid/test.
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string id;  // defaults to the audio file stem
  std::filesystem::path audio;
  std::filesystem::path lab;
  Split split = Split::train;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(Split s) const;
  std::vector<std::string> ids(Split s) const;
  std::array<std::size_t, 3> counts() const;  // train, valid, test
  /// 61 train / 16 valid / 16 test.
  bool is_official_protocol() const;
};

/// {"entries": [{"audio": ..., "lab": ..., "split": ..., "id"?: ...}]}.
/// Relative paths resolve against `base_dir`. Throws ConfigError.
Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir = {});
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Ids and audio files unique (so splits partition the set) and every split
/// non-empty. Throws ConfigError.
void validate(const Manifest& manifest);

}  // namespace distillnet::features
