#include "distillnet/features/labels.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "distillnet/errors.hpp"

namespace distillnet::features {

namespace {

double parse_time(const std::string& token, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("'" + token + "' is not a time in seconds", line);
  }
}

}  // namespace

LabelTrack parse_lab(std::string_view text, std::string source) {
  struct Row {
    LabelInterval interval;
    int line;
  };
  std::vector<Row> rows;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream fields(raw);
    std::string a, b, cls, extra;
    if (!(fields >> a)) continue;
    if (a[0] == '#') continue;
    if (!(fields >> b >> cls)) throw ParseError(source + ": expected 'start end class'", line);
    if (fields >> extra) throw ParseError(source + ": unexpected trailing token '" + extra + "'", line);
    LabelInterval iv{parse_time(a, line), parse_time(b, line), kNoVoice};
    if (cls == "sing") iv.label = kVoice;
    else if (cls != "nosing") throw ParseError(source + ": unknown class '" + cls + "'", line);
    if (iv.start < 0.0) throw ParseError(source + ": negative start time", line);
    if (!(iv.end > iv.start)) throw ParseError(source + ": interval end must exceed start", line);
    rows.push_back({iv, line});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& x, const Row& y) { return x.interval.start < y.interval.start; });
  LabelTrack track{std::move(source), {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].interval.start < rows[i - 1].interval.end)
      throw ParseError(track.source + ": interval overlaps the one on line " + std::to_string(rows[i - 1].line),
                       rows[i].line);
    track.intervals.push_back(rows[i].interval);
  }
  return track;
}

LabelTrack parse_lab_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open label file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lab(buf.str(), path.string());
}

std::string format_lab(const LabelTrack& track) {
  std::ostringstream out;
  out.precision(10);
  for (const auto& iv : track.intervals)
    out << iv.start << ' ' << iv.end << ' ' << (iv.label == kVoice ? "sing" : "nosing") << '\n';
  return out.str();
}

int label_at(const LabelTrack& track, double time) {
  auto it = std::upper_bound(track.intervals.begin(), track.intervals.end(), time,
                             [](double t, const LabelInterval& iv) { return t < iv.start; });
  if (it != track.intervals.begin()) {
    --it;
    if (time >= it->start && time < it->end) return it->label;
  }
  throw LabelError(track.source + ": no label covers t=" + std::to_string(time) + "s");
}

std::vector<int> frame_labels(const LabelTrack& track, std::size_t frames, double frame_seconds,
                              double end_tolerance) {
  std::vector<int> labels(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) * frame_seconds;
    if (!track.intervals.empty() && t >= track.intervals.back().end &&
        t < track.intervals.back().end + end_tolerance) {
      labels[k] = track.intervals.back().label;
      continue;
    }
    labels[k] = label_at(track, t);
  }
  return labels;
}

}  // namespace distillnet::features
