#include "mouseleak/audio_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mouseleak/error.hpp"

namespace mouseleak {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
  }
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

Error malformed(const std::filesystem::path& path, const std::string& field) {
  return Error(ErrorCode::MalformedHeader,
               fmt::format("{}: malformed WAV header ({})", path.string(), field));
}

double decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    float f;
    std::uint32_t raw = le32(p);
    std::memcpy(&f, &raw, sizeof f);
    if (!std::isfinite(f)) return 0.0;
    return std::clamp(static_cast<double>(f), -1.0, 1.0);
  }
  switch (bits) {
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

}  // namespace

AudioClip::AudioClip(std::vector<std::vector<double>> channels, int sample_rate,
                     int source_bit_depth)
    : channels_(std::move(channels)),
      sample_rate_(sample_rate),
      source_bit_depth_(source_bit_depth) {
  if (sample_rate_ <= 0) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("sample_rate must be positive, got {}", sample_rate_));
  }
  if (channels_.size() != 1 && channels_.size() != 2) {
    throw Error(ErrorCode::UnsupportedChannels,
                fmt::format("n_channels must be 1 or 2, got {}", channels_.size()));
  }
  if (channels_.size() == 2 && channels_[0].size() != channels_[1].size()) {
    throw Error(ErrorCode::InvalidArgument, "channels differ in length");
  }
  for (const auto& ch : channels_) {
    for (double s : ch) {
      if (!(s >= -1.0 && s <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("sample {} outside [-1, 1]", s));
      }
    }
  }
}

AudioClip AudioClip::mono(std::vector<double> samples, int sample_rate,
                          int source_bit_depth) {
  std::vector<std::vector<double>> ch;
  ch.push_back(std::move(samples));
  return AudioClip(std::move(ch), sample_rate, source_bit_depth);
}

AudioClip AudioClip::stereo(std::vector<double> first, std::vector<double> second,
                            int sample_rate, int source_bit_depth) {
  std::vector<std::vector<double>> ch;
  ch.push_back(std::move(first));
  ch.push_back(std::move(second));
  return AudioClip(std::move(ch), sample_rate, source_bit_depth);
}

std::span<const double> AudioClip::samples(std::size_t channel) const {
  if (channel >= channels_.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                fmt::format("channel index {} out of range for {} channel(s)",
                            channel, channels_.size()));
  }
  return channels_[channel];
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound,
                fmt::format("{}: cannot open file", path.string()));
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0) {
    throw malformed(path, "RIFF tag");
  }
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw malformed(path, "WAVE tag");
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t n_channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t size = le32(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) throw malformed(path, "fmt chunk size");
      const unsigned char* f = bytes.data() + body;
      format = le16(f);
      n_channels = le16(f + 2);
      sample_rate = le32(f + 4);
      block_align = le16(f + 12);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw malformed(path, "extensible fmt chunk size");
        format = le16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Streaming writers sometimes leave the size unset; take what exists.
      data_size = std::min<std::size_t>(size, avail);
      if (have_fmt) break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw malformed(path, "missing fmt chunk");
  if (data == nullptr) throw malformed(path, "missing data chunk");
  if (format != kFormatPcm && format != kFormatFloat) {
    throw Error(ErrorCode::UnsupportedCodec,
                fmt::format("{}: unsupported format tag {}", path.string(), format));
  }
  if (n_channels != 1 && n_channels != 2) {
    throw Error(ErrorCode::UnsupportedChannels,
                fmt::format("{}: unsupported channel count {}", path.string(),
                            n_channels));
  }
  bool depth_ok = format == kFormatFloat ? bits == 32
                                         : (bits == 16 || bits == 24 || bits == 32);
  if (!depth_ok) {
    throw Error(ErrorCode::UnsupportedBitDepth,
                fmt::format("{}: unsupported bit depth {}", path.string(), bits));
  }
  if (sample_rate == 0) throw malformed(path, "sample rate 0");
  std::size_t bytes_per_sample = bits / 8;
  if (block_align != bytes_per_sample * n_channels) {
    throw malformed(path, "block align");
  }

  std::size_t frames = data_size / block_align;
  std::vector<std::vector<double>> channels(n_channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* frame = data + i * block_align;
    for (std::size_t c = 0; c < n_channels; ++c) {
      channels[c][i] = decode_sample(frame + c * bytes_per_sample, format, bits);
    }
  }
  return AudioClip(std::move(channels), static_cast<int>(sample_rate), bits);
}

long long quantize_sample(double value, int bit_depth) {
  const double full_scale = std::ldexp(1.0, bit_depth - 1);
  // nearbyint honours the default round-half-to-even mode.
  double q = std::nearbyint(value * full_scale);
  q = std::clamp(q, -full_scale, full_scale - 1.0);
  return static_cast<long long>(q);
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               int bit_depth) {
  if (bit_depth != 16 && bit_depth != 32) {
    throw Error(ErrorCode::UnsupportedBitDepth,
                fmt::format("bit_depth must be 16 or 32, got {}", bit_depth));
  }
  const auto n_channels = static_cast<std::uint16_t>(clip.n_channels());
  const std::uint16_t bytes_per_sample = static_cast<std::uint16_t>(bit_depth / 8);
  const std::uint16_t block_align = n_channels * bytes_per_sample;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(clip.n_samples() * block_align);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, n_channels);
  put32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put32(out, static_cast<std::uint32_t>(clip.sample_rate()) * block_align);
  put16(out, block_align);
  put16(out, static_cast<std::uint16_t>(bit_depth));
  put_tag(out, "data");
  put32(out, data_size);

  for (std::size_t i = 0; i < clip.n_samples(); ++i) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      long long q = quantize_sample(clip.samples(c)[i], bit_depth);
      if (bit_depth == 16) {
        put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        put32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(q)));
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorCode::Io, fmt::format("{}: cannot open for writing", path.string()));
  }
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw Error(ErrorCode::Io, fmt::format("{}: write failed", path.string()));
  }
}

AudioClip to_mono(const AudioClip& clip) {
  if (clip.is_mono()) return clip;
  auto a = clip.samples(0);
  auto b = clip.samples(1);
  std::vector<double> mixed(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mixed[i] = 0.5 * (a[i] + b[i]);
  return AudioClip::mono(std::move(mixed), clip.sample_rate(), clip.source_bit_depth());
}

AudioClip channel(const AudioClip& clip, std::size_t index) {
  auto s = clip.samples(index);
  return AudioClip::mono(std::vector<double>(s.begin(), s.end()), clip.sample_rate(),
                         clip.source_bit_depth());
}

AudioClip merge_channels(const AudioClip& first, const AudioClip& second) {
  if (!first.is_mono() || !second.is_mono()) {
    throw Error(ErrorCode::UnsupportedChannels, "merge_channels expects two mono clips");
  }
  if (first.sample_rate() != second.sample_rate()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("sample rates differ: {} vs {}", first.sample_rate(),
                            second.sample_rate()));
  }
  std::size_t n = std::min(first.n_samples(), second.n_samples());
  auto a = first.samples();
  auto b = second.samples();
  return AudioClip::stereo(std::vector<double>(a.begin(), a.begin() + n),
                           std::vector<double>(b.begin(), b.begin() + n),
                           first.sample_rate(),
                           std::max(first.source_bit_depth(), second.source_bit_depth()));
}

AudioClip swap_channels(const AudioClip& stereo) {
  if (stereo.n_channels() != 2) {
    throw Error(ErrorCode::UnsupportedChannels, "swap_channels expects a stereo clip");
  }
  auto a = stereo.samples(0);
  auto b = stereo.samples(1);
  return AudioClip::stereo(std::vector<double>(b.begin(), b.end()),
                           std::vector<double>(a.begin(), a.end()),
                           stereo.sample_rate(), stereo.source_bit_depth());
}

AudioClip slice(const AudioClip& clip, double start_s, double end_s) {
  if (!(start_s >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("slice start_s must be >= 0, got {}", start_s));
  }
  if (!(start_s < end_s)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("slice start_s {} must be < end_s {}", start_s, end_s));
  }
  const double n = static_cast<double>(clip.n_samples());
  const double rate = clip.sample_rate();
  // Length is rounded from the duration so it equals round((end-start)*rate)
  // whenever the slice fits.
  const double start = std::round(start_s * rate);
  const auto first = static_cast<std::size_t>(std::min(n, start));
  const auto last =
      static_cast<std::size_t>(std::min(n, start + std::round((end_s - start_s) * rate)));

  std::vector<std::vector<double>> channels;
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    auto s = clip.samples(c);
    channels.emplace_back(s.begin() + first, s.begin() + last);
  }
  return AudioClip(std::move(channels), clip.sample_rate(), clip.source_bit_depth());
}

AudioClip scale(const AudioClip& clip, double gain) {
  std::vector<std::vector<double>> channels;
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    auto s = clip.samples(c);
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::clamp(s[i] * gain, -1.0, 1.0);
    channels.push_back(std::move(out));
  }
  return AudioClip(std::move(channels), clip.sample_rate(), clip.source_bit_depth());
}

}  // namespace mouseleak
