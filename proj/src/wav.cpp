#include "doalab/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "doalab/errors.hpp"

namespace doalab::wav {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t offset) {
  if (offset + sizeof(T) > buf.size()) throw InvalidArgument("wav: truncated file");
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void put_le(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

WavData read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("wav: cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw InvalidArgument("wav: not a RIFF/WAVE file: " + path.string());
  }

  std::uint16_t format_tag = 0;
  std::uint16_t channel_count = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = read_le<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format_tag = read_le<std::uint16_t>(buf, body);
      channel_count = read_le<std::uint16_t>(buf, body + 2);
      sample_rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
      if (format_tag == kFormatExtensible && size >= 26) {
        format_tag = read_le<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, buf.size() - body);
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || data_offset == 0) throw InvalidArgument("wav: missing fmt or data chunk");
  if (channel_count == 0 || sample_rate == 0) throw InvalidArgument("wav: bad fmt chunk");

  WavData result;
  std::size_t bytes_per_sample = 0;
  if (format_tag == kFormatPcm && bits == 16) {
    result.format = SampleFormat::Pcm16;
    bytes_per_sample = 2;
  } else if (format_tag == kFormatFloat && bits == 32) {
    result.format = SampleFormat::Float32;
    bytes_per_sample = 4;
  } else {
    throw InvalidArgument("wav: unsupported encoding (need 16-bit PCM or 32-bit float)");
  }

  const std::size_t frames = data_size / (bytes_per_sample * channel_count);
  std::vector<std::vector<double>> chans(channel_count, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channel_count; ++c) {
      const std::size_t off = data_offset + (i * channel_count + c) * bytes_per_sample;
      if (result.format == SampleFormat::Pcm16) {
        chans[c][i] = static_cast<double>(read_le<std::int16_t>(buf, off)) / 32768.0;
      } else {
        chans[c][i] = static_cast<double>(read_le<float>(buf, off));
      }
    }
  }
  for (auto& ch : chans) result.channels.emplace_back(std::move(ch), static_cast<double>(sample_rate));
  return result;
}

StereoSignal read_stereo(const std::filesystem::path& path) {
  auto data = read(path);
  if (data.channels.size() == 1) return StereoSignal(data.channels[0], data.channels[0]);
  if (data.channels.size() == 2) return StereoSignal(data.channels[0], data.channels[1]);
  throw InvalidArgument("wav: expected 1 or 2 channels, got " +
                        std::to_string(data.channels.size()));
}

void write(const std::filesystem::path& path, const std::vector<MonoSignal>& channels,
           SampleFormat format) {
  if (channels.empty()) throw InvalidArgument("wav: no channels to write");
  const std::size_t frames = channels.front().size();
  const double rate = channels.front().sample_rate();
  for (const auto& c : channels) {
    if (c.size() != frames || c.sample_rate() != rate) {
      throw InvalidArgument("wav: channels differ in length or rate");
    }
  }
  if (std::abs(rate - std::round(rate)) > 1e-9) {
    throw InvalidArgument("wav: sample rate must be an integer");
  }

  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bytes = format == SampleFormat::Pcm16 ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(frames * nch * bytes);
  const auto srate = static_cast<std::uint32_t>(std::lround(rate));

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_le<std::uint32_t>(out, 36 + data_size);
  out.append("WAVEfmt ");
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  put_le<std::uint16_t>(out, nch);
  put_le<std::uint32_t>(out, srate);
  put_le<std::uint32_t>(out, srate * nch * bytes);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(nch * bytes));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(8 * bytes));
  out.append("data");
  put_le<std::uint32_t>(out, data_size);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& c : channels) {
      if (format == SampleFormat::Pcm16) {
        const double v = std::clamp(c[i], -1.0, 32767.0 / 32768.0);
        put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(v * 32768.0)));
      } else {
        put_le<float>(out, static_cast<float>(c[i]));
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidArgument("wav: cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw InvalidArgument("wav: write failed for " + path.string());
}

void write(const std::filesystem::path& path, const StereoSignal& signal, SampleFormat format) {
  write(path, std::vector<MonoSignal>{signal.left(), signal.right()}, format);
}

}  // namespace doalab::wav
