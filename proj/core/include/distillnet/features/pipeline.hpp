#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "distillnet/features/audio.hpp"
#include "distillnet/features/hpss.hpp"
#include "distillnet/features/manifest.hpp"
#include "distillnet/features/normalize.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::features {

/// cnn_mel: 80-bin log-mel. rnn_hpss: 40 harmonic + 40 percussive log-mel
/// bins from double-stage HPSS. shared_cnn_mel: the cnn_mel features, used
/// by every model in an ensemble run (same cache files as cnn_mel).
enum class Pipeline { cnn_mel, rnn_hpss, shared_cnn_mel };

std::string_view to_string(Pipeline p);
Pipeline parse_pipeline(std::string_view name);  // ConfigError on unknown names
/// "mel" or "hpss": the cache namespace of a pipeline.
std::string_view feature_kind(Pipeline p);

struct FeatureConfig {
  double sample_rate = 22050.0;
  std::size_t fft_size = 1024;
  std::size_t hop = 315;
  std::size_t mel_bins = 80;
  double fmin = 27.5;
  double fmax = 8000.0;
  bool log_compress = true;
  HpssStageConfig harmonic_stage{8192, 2048, 17, 17, 2.0};
  HpssStageConfig percussive_stage{512, 128, 17, 17, 2.0};
  /// Frames this far past the last label interval (in hops) inherit its label.
  double label_end_tolerance_hops = 1.0;

  double frame_seconds() const { return static_cast<double>(hop) / sample_rate; }
  std::string to_json() const;
  static FeatureConfig from_json(std::string_view text);
};

/// [mel_bins, frames], log-compressed when configured.
Tensor mel_features(const AudioClip& clip, const FeatureConfig& config);

struct HpssFeatures {
  Tensor harmonic;    // [mel_bins/2, frames], linear
  Tensor percussive;  // [mel_bins/2, frames], linear
};

/// Stage-1 harmonic and stage-2 percussive signals, each projected onto
/// mel_bins/2 mel filters on the main STFT grid.
HpssFeatures hpss_double_stage(const AudioClip& clip, const FeatureConfig& config);

/// [mel_bins, frames]: harmonic rows first, then percussive.
Tensor hpss_features(const AudioClip& clip, const FeatureConfig& config);

Tensor extract_features(const AudioClip& clip, Pipeline pipeline, const FeatureConfig& config);

struct SongFeatures {
  std::string id;
  Tensor features;          // [mel_bins, frames]
  std::vector<int> labels;  // one per frame
  std::string hash;         // covers config, pipeline kind, audio and label bytes
};

std::string song_hash(const ManifestEntry& entry, Pipeline pipeline, const FeatureConfig& config);

/// Reads, extracts and labels one song. Features are rounded to float32 so
/// the cached copy is bit-identical to the in-memory one.
SongFeatures extract_song(const ManifestEntry& entry, Pipeline pipeline, const FeatureConfig& config);

void save_song_features(const std::filesystem::path& path, const SongFeatures& song);
SongFeatures load_song_features(const std::filesystem::path& path);

std::filesystem::path song_cache_path(const std::filesystem::path& cache_dir, Pipeline pipeline,
                                      std::string_view id);
/// Statistics depend on the training split, so their file name carries the hash.
std::filesystem::path stats_cache_path(const std::filesystem::path& cache_dir, Pipeline pipeline,
                                       std::string_view stats_hash);

/// Hash over the pipeline config and the training songs' hashes, in id order.
std::string stats_hash(const Manifest& manifest, Pipeline pipeline, const FeatureConfig& config);

struct ExtractSummary {
  std::size_t written = 0;
  std::size_t skipped = 0;
  bool stats_written = false;
  std::filesystem::path stats_path;
  std::vector<std::string> failures;  // "<id>: <reason>", one per song that could not be extracted
};

/// Extracts every song whose cache entry is missing or stale and (re)computes
/// normalisation statistics from the training split only. Idempotent. Songs
/// that fail are reported in `failures`; statistics are then not written.
ExtractSummary ensure_features(const Manifest& manifest, Pipeline pipeline, const FeatureConfig& config,
                               const std::filesystem::path& cache_dir, std::ostream* log = nullptr);

struct SplitFeatures {
  std::vector<SongFeatures> songs;  // normalised
  NormalizationStats stats;
};

/// Loads cached songs of one split, checks every hash against the manifest
/// and the stats' provenance against the training ids, then normalises.
/// Throws ConfigError when the cache is missing or stale.
SplitFeatures load_split(const Manifest& manifest, Split split, Pipeline pipeline, const FeatureConfig& config,
                         const std::filesystem::path& cache_dir);

}  // namespace distillnet::features
