#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace distillnet::features {

inline constexpr int kNoVoice = 0;
inline constexpr int kVoice = 1;

/// Half-open [start, end) in seconds.
struct LabelInterval {
  double start = 0.0;
  double end = 0.0;
  int label = kNoVoice;

  friend bool operator==(const LabelInterval&, const LabelInterval&) = default;
};

struct LabelTrack {
  std::string source;
  std::vector<LabelInterval> intervals;  // sorted, non-overlapping
};

/// Lines of "start end class" with class in {sing, nosing}; blank lines and
/// lines starting with '#' are skipped. Throws ParseError with the line number.
LabelTrack parse_lab(std::string_view text, std::string source);
LabelTrack parse_lab_file(const std::filesystem::path& path);
std::string format_lab(const LabelTrack& track);

/// Label of the interval containing `time`; LabelError names the file and time otherwise.
int label_at(const LabelTrack& track, double time);

/// Labels for frames centred at k * frame_seconds. Frames past the last
/// interval by at most `end_tolerance` seconds take its label.
std::vector<int> frame_labels(const LabelTrack& track, std::size_t frames, double frame_seconds,
                              double end_tolerance = 0.0);

}  // namespace distillnet::features
