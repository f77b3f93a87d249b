#include "distillnet/features/pipeline.hpp"

#include <algorithm>
#include <json.hpp>
#include <ostream>

#include "distillnet/container.hpp"
#include "distillnet/errors.hpp"
#include "distillnet/features/labels.hpp"
#include "distillnet/features/mel.hpp"
#include "distillnet/features/stft.hpp"
#include "distillnet/hash.hpp"

namespace distillnet::features {

namespace {

nlohmann::json stage_json(const HpssStageConfig& s) {
  return {{"window", s.window},
          {"hop", s.hop},
          {"time_kernel", s.time_kernel},
          {"freq_kernel", s.freq_kernel},
          {"mask_power", s.mask_power}};
}

HpssStageConfig stage_from(const nlohmann::json& j) {
  return {j.at("window").get<std::size_t>(), j.at("hop").get<std::size_t>(), j.at("time_kernel").get<std::size_t>(),
          j.at("freq_kernel").get<std::size_t>(), j.at("mask_power").get<double>()};
}

void check_rate(const AudioClip& clip, const FeatureConfig& config) {
  if (clip.sample_rate != config.sample_rate)
    throw IngestionError("audio sampled at " + std::to_string(clip.sample_rate) + " Hz; features expect " +
                         std::to_string(config.sample_rate) + " Hz (resample before extraction)");
}

Tensor mel_of_signal(std::span<const double> signal, const FeatureConfig& config, std::size_t bins) {
  const auto spec = stft(signal, config.fft_size, config.hop);
  const auto fb = mel_filterbank(config.fft_size / 2 + 1, bins, config.sample_rate, config.fmin, config.fmax);
  return apply_filterbank(fb, magnitude(spec));
}

void round_to_float(Tensor& t) {
  for (auto& v : t.storage()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::cnn_mel: return "cnn_mel";
    case Pipeline::rnn_hpss: return "rnn_hpss";
    case Pipeline::shared_cnn_mel: return "shared_cnn_mel";
  }
  return "?";
}

Pipeline parse_pipeline(std::string_view name) {
  if (name == "cnn_mel") return Pipeline::cnn_mel;
  if (name == "rnn_hpss") return Pipeline::rnn_hpss;
  if (name == "shared_cnn_mel") return Pipeline::shared_cnn_mel;
  throw ConfigError("unknown pipeline '" + std::string(name) + "' (expected cnn_mel, rnn_hpss or shared_cnn_mel)");
}

std::string_view feature_kind(Pipeline p) { return p == Pipeline::rnn_hpss ? "hpss" : "mel"; }

std::string FeatureConfig::to_json() const {
  return nlohmann::json{{"sample_rate", sample_rate},
                        {"fft_size", fft_size},
                        {"hop", hop},
                        {"mel_bins", mel_bins},
                        {"fmin", fmin},
                        {"fmax", fmax},
                        {"log_compress", log_compress},
                        {"harmonic_stage", stage_json(harmonic_stage)},
                        {"percussive_stage", stage_json(percussive_stage)},
                        {"label_end_tolerance_hops", label_end_tolerance_hops}}
      .dump();
}

FeatureConfig FeatureConfig::from_json(std::string_view text) {
  FeatureConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, _] : j.items())
      if (!nlohmann::json::parse(c.to_json()).contains(key))
        throw ConfigError("unknown feature config key '" + key + "'");
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.fft_size = j.value("fft_size", c.fft_size);
    c.hop = j.value("hop", c.hop);
    c.mel_bins = j.value("mel_bins", c.mel_bins);
    c.fmin = j.value("fmin", c.fmin);
    c.fmax = j.value("fmax", c.fmax);
    c.log_compress = j.value("log_compress", c.log_compress);
    if (j.contains("harmonic_stage")) c.harmonic_stage = stage_from(j.at("harmonic_stage"));
    if (j.contains("percussive_stage")) c.percussive_stage = stage_from(j.at("percussive_stage"));
    c.label_end_tolerance_hops = j.value("label_end_tolerance_hops", c.label_end_tolerance_hops);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed feature config: ") + e.what());
  }
  if (c.mel_bins == 0 || c.mel_bins % 2 != 0) throw ConfigError("mel_bins must be positive and even");
  if (c.hop == 0 || c.hop > c.fft_size) throw ConfigError("hop must be in [1, fft_size]");
  return c;
}

Tensor mel_features(const AudioClip& clip, const FeatureConfig& config) {
  check_rate(clip, config);
  auto mel = mel_of_signal(clip.samples, config, config.mel_bins);
  if (config.log_compress) log_compress(mel);
  return mel;
}

HpssFeatures hpss_double_stage(const AudioClip& clip, const FeatureConfig& config) {
  check_rate(clip, config);
  const auto signals = hpss_double_stage_signals(clip.samples, config.harmonic_stage, config.percussive_stage);
  const auto half = config.mel_bins / 2;
  return {mel_of_signal(signals.harmonic, config, half), mel_of_signal(signals.percussive, config, half)};
}

Tensor hpss_features(const AudioClip& clip, const FeatureConfig& config) {
  auto parts = hpss_double_stage(clip, config);
  const auto half = parts.harmonic.dim(0), frames = parts.harmonic.dim(1);
  Tensor out({2 * half, frames});
  for (std::size_t b = 0; b < half; ++b)
    for (std::size_t t = 0; t < frames; ++t) {
      out.at(b, t) = parts.harmonic.at(b, t);
      out.at(half + b, t) = parts.percussive.at(b, t);
    }
  if (config.log_compress) log_compress(out);
  return out;
}

Tensor extract_features(const AudioClip& clip, Pipeline pipeline, const FeatureConfig& config) {
  return pipeline == Pipeline::rnn_hpss ? hpss_features(clip, config) : mel_features(clip, config);
}

std::string song_hash(const ManifestEntry& entry, Pipeline pipeline, const FeatureConfig& config) {
  const std::string key = std::string(feature_kind(pipeline)) + '\n' + config.to_json() + '\n' +
                          sha256_file(entry.audio) + '\n' + sha256_file(entry.lab);
  return sha256_hex(key);
}

SongFeatures extract_song(const ManifestEntry& entry, Pipeline pipeline, const FeatureConfig& config) {
  SongFeatures song;
  song.id = entry.id;
  song.hash = song_hash(entry, pipeline, config);
  const auto clip = read_wav(entry.audio);
  song.features = extract_features(clip, pipeline, config);
  round_to_float(song.features);
  const auto track = parse_lab_file(entry.lab);
  song.labels = frame_labels(track, song.features.dim(1), config.frame_seconds(),
                             config.label_end_tolerance_hops * config.frame_seconds());
  return song;
}

void save_song_features(const std::filesystem::path& path, const SongFeatures& song) {
  const auto bins = song.features.dim(0), frames = song.features.dim(1);
  if (song.labels.size() != frames) throw DimensionError("label count does not match frame count");
  std::vector<float> payload;
  payload.reserve(bins * frames + frames);
  for (double v : song.features.values()) payload.push_back(static_cast<float>(v));
  for (int l : song.labels) payload.push_back(static_cast<float>(l));
  const nlohmann::json header{
      {"kind", "features"}, {"id", song.id}, {"bins", bins}, {"frames", frames}, {"hash", song.hash}};
  std::filesystem::create_directories(path.parent_path());
  write_container(path, header.dump(), payload);
}

SongFeatures load_song_features(const std::filesystem::path& path) {
  using Kind = ContainerError::Kind;
  auto c = read_container(path);
  SongFeatures song;
  std::size_t bins = 0, frames = 0;
  try {
    const auto header = nlohmann::json::parse(c.header_json);
    if (header.at("kind").get<std::string>() != "features")
      throw ContainerError(Kind::corrupt_header, path.string() + " is not a feature cache file");
    song.id = header.at("id").get<std::string>();
    bins = header.at("bins").get<std::size_t>();
    frames = header.at("frames").get<std::size_t>();
    song.hash = header.at("hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::corrupt_header, std::string("feature header incomplete: ") + e.what());
  }
  if (bins == 0 || frames == 0 || c.payload.size() != bins * frames + frames)
    throw ContainerError(Kind::length_mismatch, path.string() + ": payload does not match " + std::to_string(bins) +
                                                    "x" + std::to_string(frames) + " features");
  song.features = Tensor({bins, frames});
  for (std::size_t i = 0; i < bins * frames; ++i) song.features.storage()[i] = c.payload[i];
  song.labels.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const float l = c.payload[bins * frames + t];
    if (l != 0.0f && l != 1.0f) throw ContainerError(Kind::corrupt_header, path.string() + ": invalid label value");
    song.labels[t] = static_cast<int>(l);
  }
  return song;
}

std::filesystem::path song_cache_path(const std::filesystem::path& cache_dir, Pipeline pipeline,
                                      std::string_view id) {
  return cache_dir / feature_kind(pipeline) / (std::string(id) + ".dnkd");
}

std::filesystem::path stats_cache_path(const std::filesystem::path& cache_dir, Pipeline pipeline,
                                       std::string_view stats_hash) {
  return cache_dir / feature_kind(pipeline) / ("norm-" + std::string(stats_hash.substr(0, 16)) + ".dnkd");
}

std::string stats_hash(const Manifest& manifest, Pipeline pipeline, const FeatureConfig& config) {
  auto train = manifest.split(Split::train);
  std::sort(train.begin(), train.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  std::string key = std::string(feature_kind(pipeline)) + '\n' + config.to_json();
  for (const auto* e : train) key += '\n' + e->id + ':' + song_hash(*e, pipeline, config);
  return sha256_hex(key);
}

namespace {

bool cache_is_current(const std::filesystem::path& path, const std::string& hash) {
  if (!std::filesystem::exists(path)) return false;
  try {
    auto c = read_container(path);
    return nlohmann::json::parse(c.header_json).at("hash").get<std::string>() == hash;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ExtractSummary ensure_features(const Manifest& manifest, Pipeline pipeline, const FeatureConfig& config,
                               const std::filesystem::path& cache_dir, std::ostream* log) {
  validate(manifest);
  ExtractSummary summary;
  std::vector<Tensor> train_features;
  std::vector<std::string> train_ids;
  for (const auto& entry : manifest.entries) {
    const auto path = song_cache_path(cache_dir, pipeline, entry.id);
    SongFeatures song;
    try {
      const auto hash = song_hash(entry, pipeline, config);
      if (cache_is_current(path, hash)) {
        ++summary.skipped;
        if (entry.split == Split::train) song = load_song_features(path);
      } else {
        song = extract_song(entry, pipeline, config);
        save_song_features(path, song);
        ++summary.written;
        if (log) *log << "extracted " << entry.id << " (" << song.features.dim(1) << " frames)\n";
      }
    } catch (const Error& e) {
      summary.failures.push_back(entry.id + ": " + e.what());
      continue;
    }
    if (entry.split == Split::train) {
      train_features.push_back(std::move(song.features));
      train_ids.push_back(entry.id);
    }
  }
  if (!summary.failures.empty()) return summary;
  const auto shash = stats_hash(manifest, pipeline, config);
  summary.stats_path = stats_cache_path(cache_dir, pipeline, shash);
  bool stats_current = false;
  if (std::filesystem::exists(summary.stats_path)) {
    try {
      stats_current = load_stats(summary.stats_path).config_hash == shash;
    } catch (const ContainerError&) {
    }
  }
  if (!stats_current) {
    auto stats = compute_norm_stats(train_features, train_ids);
    stats.config_hash = shash;
    save_stats(summary.stats_path, stats);
    summary.stats_written = true;
  }
  return summary;
}

SplitFeatures load_split(const Manifest& manifest, Split split, Pipeline pipeline, const FeatureConfig& config,
                         const std::filesystem::path& cache_dir) {
  SplitFeatures out;
  const auto shash = stats_hash(manifest, pipeline, config);
  const auto stats_path = stats_cache_path(cache_dir, pipeline, shash);
  if (!std::filesystem::exists(stats_path))
    throw ConfigError("no normalisation statistics in " + cache_dir.string() + "; run extract-features first");
  out.stats = load_stats(stats_path);
  if (out.stats.config_hash != shash) throw ConfigError("normalisation statistics are stale; rerun extract-features");
  audit_provenance(out.stats, manifest.ids(Split::train));
  for (const auto* entry : manifest.split(split)) {
    const auto path = song_cache_path(cache_dir, pipeline, entry->id);
    if (!std::filesystem::exists(path))
      throw ConfigError("no cached features for '" + entry->id + "'; run extract-features first");
    auto song = load_song_features(path);
    if (song.hash != song_hash(*entry, pipeline, config))
      throw ConfigError("cached features for '" + entry->id + "' are stale; rerun extract-features");
    normalize(song.features, out.stats);
    out.songs.push_back(std::move(song));
  }
  return out;
}

}  // namespace distillnet::features
