#include <gtest/gtest.h>

#include <cmath>
#include <json.hpp>

#include "distillnet/errors.hpp"
#include "distillnet/features/manifest.hpp"
#include "distillnet/features/normalize.hpp"
#include "test_support.hpp"

namespace distillnet::features {
namespace {

using testing::TempDir;

std::vector<Tensor> random_songs(std::mt19937_64& rng) {
  std::vector<Tensor> songs;
  for (std::size_t frames : {17u, 40u, 3u}) {
    Tensor t = testing::random_tensor({6, frames}, rng, -2.0, 5.0);
    for (std::size_t f = 0; f < frames; ++f) t.at(2, f) *= 100.0;
    songs.push_back(std::move(t));
  }
  return songs;
}

TEST(NormStats, NormalisedTrainingSetHasZeroMeanUnitStd) {
  std::mt19937_64 rng(51);
  auto songs = random_songs(rng);
  const auto stats = compute_norm_stats(songs, {"a", "b", "c"});
  for (auto& s : songs) normalize(s, stats);
  const auto again = compute_norm_stats(songs);
  for (std::size_t b = 0; b < 6; ++b) {
    EXPECT_NEAR(again.mean[b], 0.0, 1e-6);
    EXPECT_NEAR(again.std[b], 1.0, 1e-6);
  }
}

TEST(NormStats, MatchesDirectPopulationFormula) {
  std::mt19937_64 rng(52);
  const auto songs = random_songs(rng);
  const auto stats = compute_norm_stats(songs);
  for (std::size_t b = 0; b < 6; ++b) {
    std::vector<double> all;
    for (const auto& s : songs)
      for (std::size_t f = 0; f < s.dim(1); ++f) all.push_back(s.at(b, f));
    double mean = 0;
    for (double v : all) mean += v;
    mean /= static_cast<double>(all.size());
    double var = 0;
    for (double v : all) var += (v - mean) * (v - mean);
    EXPECT_NEAR(stats.mean[b], mean, 1e-12 * (1 + std::abs(mean)));
    EXPECT_NEAR(stats.std[b], std::sqrt(var / static_cast<double>(all.size())), 1e-10);
  }
}

TEST(NormStats, ConstantBinUsesFloorAndMapsToZero) {
  Tensor t({2, 5}, 3.0);
  t.at(1, 0) = 1.0;
  const std::vector<Tensor> songs{t};
  const auto stats = compute_norm_stats(songs);
  EXPECT_EQ(stats.std[0], kStdFloor);
  Tensor n = t;
  normalize(n, stats);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(n.at(0, f), 0.0);
}

TEST(NormStats, DenormaliseInvertsNormalise) {
  std::mt19937_64 rng(53);
  const auto songs = random_songs(rng);
  const auto stats = compute_norm_stats(songs);
  Tensor x = songs[1];
  normalize(x, stats);
  denormalize(x, stats);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], songs[1][i], 1e-6);
}

TEST(NormStats, RejectsTooLittleData) {
  EXPECT_THROW(compute_norm_stats(std::vector<Tensor>{}), IngestionError);
  EXPECT_THROW(compute_norm_stats(std::vector<Tensor>{Tensor({4, 1})}), IngestionError);
  EXPECT_THROW(compute_norm_stats(std::vector<Tensor>{Tensor({4, 3}), Tensor({5, 3})}), DimensionError);
}

TEST(NormStats, ProvenanceAudit) {
  std::mt19937_64 rng(54);
  const auto stats = compute_norm_stats(random_songs(rng), {"s1", "s2"});
  EXPECT_NO_THROW(audit_provenance(stats, std::vector<std::string>{"s2", "s1"}));
  EXPECT_THROW(audit_provenance(stats, std::vector<std::string>{"s1", "s2", "v1"}), ConfigError);
  EXPECT_THROW(audit_provenance(stats, std::vector<std::string>{"s1"}), ConfigError);
}

TEST(NormStats, FileRoundTripKeepsDoublePrecision) {
  TempDir dir("stats");
  std::mt19937_64 rng(55);
  auto stats = compute_norm_stats(random_songs(rng), {"x", "y"});
  stats.config_hash = "deadbeef";
  save_stats(dir / "s.dnkd", stats);
  const auto back = load_stats(dir / "s.dnkd");
  EXPECT_EQ(back.provenance, stats.provenance);
  EXPECT_EQ(back.config_hash, stats.config_hash);
  for (std::size_t b = 0; b < 6; ++b) {
    EXPECT_NEAR(back.mean[b], stats.mean[b], 1e-13 * std::abs(stats.mean[b]));
    EXPECT_NEAR(back.std[b], stats.std[b], 1e-13 * stats.std[b]);
  }
}

std::string manifest_json(std::size_t train, std::size_t valid, std::size_t test) {
  nlohmann::json entries = nlohmann::json::array();
  std::size_t i = 0;
  for (auto [split, n] : {std::pair<const char*, std::size_t>{"train", train}, {"valid", valid}, {"test", test}})
    for (std::size_t k = 0; k < n; ++k, ++i)
      entries.push_back({{"audio", "audio/s" + std::to_string(i) + ".wav"},
                         {"lab", "labels/s" + std::to_string(i) + ".lab"},
                         {"split", split}});
  return nlohmann::json{{"entries", entries}}.dump();
}

TEST(Manifest, OfficialProtocolAccepted) {
  const auto m = parse_manifest(manifest_json(61, 16, 16), "/data/jamendo");
  EXPECT_NO_THROW(validate(m));
  EXPECT_TRUE(m.is_official_protocol());
  EXPECT_EQ(m.counts(), (std::array<std::size_t, 3>{61, 16, 16}));
  EXPECT_EQ(m.entries[0].id, "s0");
  EXPECT_EQ(m.entries[0].audio, std::filesystem::path("/data/jamendo/audio/s0.wav"));
  EXPECT_FALSE(parse_manifest(manifest_json(2, 1, 1)).is_official_protocol());
}

TEST(Manifest, OverlappingOrEmptySplitsRejected) {
  auto m = parse_manifest(manifest_json(2, 1, 1));
  m.entries.push_back(m.entries[0]);
  m.entries.back().split = Split::test;
  EXPECT_THROW(validate(m), ConfigError);
  m = parse_manifest(manifest_json(2, 1, 1));
  m.entries.back().id = "other";
  m.entries.back().audio = m.entries.front().audio;
  EXPECT_THROW(validate(m), ConfigError);
  EXPECT_THROW(validate(parse_manifest(manifest_json(2, 0, 1))), ConfigError);
}

TEST(Manifest, MalformedInputRejected) {
  EXPECT_THROW(parse_manifest("{"), ConfigError);
  EXPECT_THROW(parse_manifest(R"({"entries":[{"audio":"a.wav","lab":"a.lab","split":"dev"}]})"), ConfigError);
  EXPECT_THROW(parse_manifest(R"({"entries":[{"audio":"a.wav","lab":"a.lab","split":"train","x":1}]})"),
               ConfigError);
  EXPECT_THROW(parse_split("validation"), ConfigError);
  EXPECT_EQ(parse_split("valid"), Split::valid);
}

TEST(Manifest, SaveLoadRoundTrip) {
  TempDir dir("manifest");
  const auto m = parse_manifest(manifest_json(3, 2, 2), dir.path());
  save_manifest(m, dir / "manifest.json");
  const auto back = load_manifest(dir / "manifest.json");
  ASSERT_EQ(back.entries.size(), m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].id, m.entries[i].id);
    EXPECT_EQ(back.entries[i].split, m.entries[i].split);
    EXPECT_EQ(std::filesystem::weakly_canonical(back.entries[i].audio),
              std::filesystem::weakly_canonical(m.entries[i].audio));
  }
  EXPECT_EQ(back.ids(Split::valid), m.ids(Split::valid));
  EXPECT_THROW(load_manifest(dir / "missing.json"), ConfigError);
}

}  // namespace
}  // namespace distillnet::features
