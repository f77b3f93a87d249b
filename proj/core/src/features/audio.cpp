#include "distillnet/features/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "distillnet/errors.hpp"

namespace distillnet::features {

namespace {

std::uint32_t u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}
std::uint16_t u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open audio file " + path.string());
  const std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) { return IngestionError(path.string() + ": " + why); };
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t len = u32(b.data() + pos + 4);
    const unsigned char* body = b.data() + pos + 8;
    const std::size_t avail = b.size() - pos - 8;
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (len < 16 || avail < 16) throw fail("short fmt chunk");
      format = u16(body);
      channels = u16(body + 2);
      rate = u32(body + 4);
      bits = u16(body + 14);
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      data = body;
      data_len = std::min<std::size_t>(len, avail);
      break;
    }
    pos += 8 + len + (len & 1);
  }
  if (format != 1 || bits != 16) throw fail("only 16-bit PCM WAV is supported");
  if (channels == 0 || rate == 0) throw fail("invalid channel count or sample rate");
  if (!data) throw fail("missing data chunk");

  const std::size_t frames = data_len / (2u * channels);
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c)
      acc += static_cast<std::int16_t>(u16(data + 2 * (i * channels + c))) / 32768.0;
    clip.samples[i] = acc / channels;
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  if (!(clip.sample_rate > 0)) throw IngestionError("sample rate must be positive");
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
  const auto data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out += "RIFF";
  put32(out, 36 + data_len);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, rate);
  put32(out, rate * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_len);
  for (double s : clip.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IngestionError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace distillnet::features
