#include <gtest/gtest.h>

#include <bit>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "distillnet/container.hpp"
#include "distillnet/errors.hpp"
#include "distillnet/hash.hpp"
#include "distillnet/models/checkpoint.hpp"
#include "test_support.hpp"

namespace distillnet::models {
namespace {

using testing::TempDir;

ModelCheckpoint sample(const std::string& id, std::uint64_t seed) {
  const auto spec = build_model(id);
  return make_checkpoint(Network(spec, init_params(spec, seed)),
                         {"KD-" + id, "cnn_mel", seed, 12, 87.5, "abc123"});
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir("ckpt");
  for (const auto& id : {"FS32", "FS4", "SRNN", "LRNN"}) {
    const auto ckpt = sample(id, 3);
    save_checkpoint(ckpt, dir / "m.dnkd");
    const auto back = load_checkpoint(dir / "m.dnkd");
    EXPECT_EQ(back.spec, ckpt.spec);
    EXPECT_EQ(back.meta, ckpt.meta);
    ASSERT_EQ(back.params.size(), ckpt.params.size());
    EXPECT_EQ(sha256_hex(std::span<const float>(back.params)), sha256_hex(std::span<const float>(ckpt.params)));
    EXPECT_EQ(params_sha256(to_network(back).params()), params_sha256(to_network(ckpt).params()));
  }
}

TEST(Checkpoint, FileSizeIsHeaderPlusPayload) {
  TempDir dir("ckpt");
  save_checkpoint(sample("FS32", 1), dir / "m.dnkd");
  const auto c = read_container(dir / "m.dnkd");
  const auto size = std::filesystem::file_size(dir / "m.dnkd");
  EXPECT_EQ(size, 13 + c.header_json.size() + 1417 * 4);
  EXPECT_LT(c.header_json.size(), 4096u);
}

TEST(Checkpoint, HeaderRecordsLayerOffsets) {
  TempDir dir("ckpt");
  const auto ckpt = sample("FS16", 1);
  save_checkpoint(ckpt, dir / "m.dnkd");
  const auto header = nlohmann::json::parse(read_container(dir / "m.dnkd").header_json);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ckpt.spec.layers.size(); ++i) {
    EXPECT_EQ(header["layers"][i]["byte_offset"].get<std::size_t>(), offset);
    offset += 4 * count_layer_params(ckpt.spec, i);
  }
  EXPECT_EQ(header["param_count"].get<std::size_t>(), 5580u);
}

std::string bytes_of(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary | std::ios::trunc).write(s.data(), static_cast<std::streamsize>(s.size()));
}

TEST(Checkpoint, TamperedFilesRaiseTypedErrors) {
  using Kind = ContainerError::Kind;
  TempDir dir("ckpt");
  save_checkpoint(sample("FS32", 2), dir / "m.dnkd");
  const std::string good = bytes_of(dir / "m.dnkd");
  const auto kind_of = [&](const std::string& bytes) {
    put(dir / "bad.dnkd", bytes);
    try {
      load_checkpoint(dir / "bad.dnkd");
    } catch (const ContainerError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "tampered checkpoint loaded";
    return Kind::io;
  };

  std::string b = good;
  b[5] = static_cast<char>(b[5] + 1);  // header length off by one
  EXPECT_EQ(kind_of(b), Kind::corrupt_header);
  EXPECT_EQ(kind_of(good.substr(0, good.size() - 4)), Kind::truncated);
  b = good;
  b[b.size() - 1] ^= 0x40;
  EXPECT_EQ(kind_of(b), Kind::checksum_mismatch);
  EXPECT_EQ(kind_of("NOPE"), Kind::bad_magic);

  // A well-formed container that is not a checkpoint.
  write_container(dir / "other.dnkd", R"({"kind":"features"})", std::vector<float>{1, 2});
  EXPECT_THROW(load_checkpoint(dir / "other.dnkd"), ContainerError);
}

TEST(Checkpoint, PayloadCountMustMatchArchitecture) {
  TempDir dir("ckpt");
  auto ckpt = sample("FS32", 2);
  ckpt.params.pop_back();
  EXPECT_THROW(save_checkpoint(ckpt, dir / "m.dnkd"), DimensionError);

  // Hand-build a container whose param count disagrees with its architecture.
  save_checkpoint(sample("FS32", 2), dir / "m.dnkd");
  auto c = read_container(dir / "m.dnkd");
  auto header = nlohmann::json::parse(c.header_json);
  c.payload.pop_back();
  header.erase("payload_floats");
  write_container(dir / "short.dnkd", header.dump(), c.payload);
  EXPECT_THROW(load_checkpoint(dir / "short.dnkd"), Error);
}

}  // namespace
}  // namespace distillnet::models
