#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

// Hand-assembled WAV files for exercising the reader's edge cases.
struct WavSpec {
  std::uint16_t format = 1;
  std::uint16_t channels = 1;
  std::uint32_t rate = 44100;
  std::uint16_t bits = 16;
  bool extensible = false;
  std::vector<unsigned char> data;
};

inline void put16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}

inline void put32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

inline void put_tag(std::vector<unsigned char>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

inline std::vector<unsigned char> wav_bytes(const WavSpec& s) {
  std::vector<unsigned char> fmt;
  const std::uint16_t align = static_cast<std::uint16_t>(s.channels * s.bits / 8);
  put16(fmt, s.extensible ? 0xFFFE : s.format);
  put16(fmt, s.channels);
  put32(fmt, s.rate);
  put32(fmt, s.rate * align);
  put16(fmt, align);
  put16(fmt, s.bits);
  if (s.extensible) {
    put16(fmt, 22);
    put16(fmt, s.bits);
    put32(fmt, 0);
    put16(fmt, s.format);
    static const unsigned char guid_tail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                                0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
    fmt.insert(fmt.end(), guid_tail, guid_tail + 14);
  }
  std::vector<unsigned char> out;
  put_tag(out, "RIFF");
  put32(out, static_cast<std::uint32_t>(4 + 8 + fmt.size() + 8 + s.data.size()));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, static_cast<std::uint32_t>(fmt.size()));
  out.insert(out.end(), fmt.begin(), fmt.end());
  put_tag(out, "data");
  put32(out, static_cast<std::uint32_t>(s.data.size()));
  out.insert(out.end(), s.data.begin(), s.data.end());
  return out;
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Data chunk payload of a canonical 44-byte-header file.
inline std::vector<unsigned char> data_payload(const std::vector<unsigned char>& file) {
  return {file.begin() + 44, file.end()};
}
