#include "distillnet/features/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "distillnet/errors.hpp"

namespace distillnet::features {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, valid or test)");
}

std::vector<const ManifestEntry*> Manifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(&e);
  return out;
}

std::vector<std::string> Manifest::ids(Split s) const {
  std::vector<std::string> out;
  for (const auto* e : split(s)) out.push_back(e->id);
  return out;
}

std::array<std::size_t, 3> Manifest::counts() const {
  std::array<std::size_t, 3> c{};
  for (const auto& e : entries) ++c[static_cast<std::size_t>(e.split)];
  return c;
}

bool Manifest::is_official_protocol() const { return counts() == std::array<std::size_t, 3>{61, 16, 16}; }

Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  Manifest m;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& item : doc.at("entries")) {
      for (const auto& [key, _] : item.items())
        if (key != "audio" && key != "lab" && key != "split" && key != "id")
          throw ConfigError("manifest entry has unknown key '" + key + "'");
      ManifestEntry e;
      e.audio = item.at("audio").get<std::string>();
      e.lab = item.at("lab").get<std::string>();
      if (e.audio.is_relative()) e.audio = base_dir / e.audio;
      if (e.lab.is_relative()) e.lab = base_dir / e.lab;
      e.split = parse_split(item.at("split").get<std::string>());
      e.id = item.contains("id") ? item.at("id").get<std::string>() : e.audio.stem().string();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : manifest.entries)
    entries.push_back({{"id", e.id},
                       {"audio", e.audio.string()},
                       {"lab", e.lab.string()},
                       {"split", std::string(to_string(e.split))}});
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write manifest " + path.string());
  out << nlohmann::json{{"entries", entries}}.dump(2) << '\n';
}

void validate(const Manifest& manifest) {
  std::set<std::string> ids;
  std::set<std::filesystem::path> audio;
  for (const auto& e : manifest.entries) {
    if (e.id.empty()) throw ConfigError("manifest entry with empty id");
    if (!ids.insert(e.id).second) throw ConfigError("song id '" + e.id + "' appears more than once");
    if (!audio.insert(e.audio.lexically_normal()).second)
      throw ConfigError("audio file " + e.audio.string() + " is listed in more than one entry");
  }
  const auto c = manifest.counts();
  for (std::size_t s = 0; s < 3; ++s)
    if (c[s] == 0) throw ConfigError("manifest has no " + std::string(to_string(static_cast<Split>(s))) + " files");
}

}  // namespace distillnet::features
