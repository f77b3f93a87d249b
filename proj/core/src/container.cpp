#include "distillnet/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "distillnet/errors.hpp"
#include "distillnet/hash.hpp"

namespace distillnet {

namespace {

using Kind = ContainerError::Kind;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void write_container(const std::filesystem::path& path, const std::string& header_json,
                     std::span<const float> payload) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_json);
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::corrupt_header, std::string("container header is not JSON: ") + e.what());
  }
  if (!header.is_object()) throw ContainerError(Kind::corrupt_header, "container header must be a JSON object");
  header["payload_floats"] = payload.size();
  header["payload_sha256"] = sha256_hex(payload);
  const std::string text = header.dump();

  std::string bytes(kContainerMagic, 4);
  bytes.push_back(static_cast<char>(kContainerVersion));
  put_u64(bytes, text.size());
  bytes += text;
  bytes.reserve(bytes.size() + payload.size() * 4);
  for (float f : payload) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ContainerError(Kind::io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ContainerError(Kind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError(Kind::io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();

  if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
    throw ContainerError(Kind::bad_magic, "missing DNKD magic" + where);
  if (bytes.size() < 13) throw ContainerError(Kind::truncated, "file ends inside the preamble" + where);
  if (bytes[4] != kContainerVersion)
    throw ContainerError(Kind::unsupported_version, "unsupported container version " + std::to_string(bytes[4]) + where);
  const std::uint64_t header_len = get_u64(bytes.data() + 5);
  if (header_len > bytes.size() - 13)
    throw ContainerError(Kind::corrupt_header, "header length field exceeds file size" + where);

  Container c;
  c.header_json.assign(reinterpret_cast<const char*>(bytes.data() + 13), header_len);
  std::uint64_t floats = 0;
  std::string checksum;
  try {
    const auto header = nlohmann::json::parse(c.header_json);
    floats = header.at("payload_floats").get<std::uint64_t>();
    checksum = header.at("payload_sha256").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::corrupt_header, std::string("header does not parse: ") + e.what() + where);
  }
  const std::uint64_t available = bytes.size() - 13 - header_len;
  if (available < floats * 4)
    throw ContainerError(Kind::truncated, "payload holds " + std::to_string(available / 4) + " of " +
                                              std::to_string(floats) + " floats" + where);
  if (available != floats * 4)
    throw ContainerError(Kind::length_mismatch, "trailing bytes after payload" + where);

  c.payload.resize(floats);
  const unsigned char* p = bytes.data() + 13 + header_len;
  for (std::size_t i = 0; i < floats; ++i, p += 4) {
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
                               (std::uint32_t{p[3]} << 24);
    c.payload[i] = std::bit_cast<float>(bits);
  }
  if (sha256_hex(std::span<const float>(c.payload)) != checksum)
    throw ContainerError(Kind::checksum_mismatch, "payload does not match its recorded SHA-256" + where);
  return c;
}

}  // namespace distillnet
