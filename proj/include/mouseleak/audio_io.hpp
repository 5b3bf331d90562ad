#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace mouseleak {

/// Sampled waveform with normalized amplitudes in [-1, 1].
///
/// Immutable after construction. All channels have the same length and the
/// constructor rejects out-of-range samples, so every AudioClip in circulation
/// satisfies the invariants.
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(std::vector<std::vector<double>> channels, int sample_rate,
            int source_bit_depth = 32);

  static AudioClip mono(std::vector<double> samples, int sample_rate,
                        int source_bit_depth = 32);
  static AudioClip stereo(std::vector<double> first, std::vector<double> second,
                          int sample_rate, int source_bit_depth = 32);

  int sample_rate() const noexcept { return sample_rate_; }
  int source_bit_depth() const noexcept { return source_bit_depth_; }
  std::size_t n_channels() const noexcept { return channels_.size(); }
  std::size_t n_samples() const noexcept {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  double duration_s() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(n_samples()) / sample_rate_
                            : 0.0;
  }
  bool empty() const noexcept { return n_samples() == 0; }
  bool is_mono() const noexcept { return n_channels() == 1; }

  std::span<const double> samples(std::size_t channel = 0) const;

 private:
  std::vector<std::vector<double>> channels_;
  int sample_rate_ = 0;
  int source_bit_depth_ = 32;
};

AudioClip read_wav(const std::filesystem::path& path);

/// Writes integer PCM at 16 or 32 bits. Quantization rounds half to even.
void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               int bit_depth = 16);

/// Quantizes a normalized sample to a signed integer of the given width,
/// saturating at the type limits.
long long quantize_sample(double value, int bit_depth);

AudioClip to_mono(const AudioClip& clip);
AudioClip channel(const AudioClip& clip, std::size_t index);

/// Zips two mono clips of equal rate into one stereo clip. The shorter clip
/// determines the length.
AudioClip merge_channels(const AudioClip& first, const AudioClip& second);
AudioClip swap_channels(const AudioClip& stereo);

/// Half-open [start_s, end_s) at sample resolution, clamped to the clip.
AudioClip slice(const AudioClip& clip, double start_s, double end_s);

/// Scales every sample by gain; the result is clipped to [-1, 1].
AudioClip scale(const AudioClip& clip, double gain);

}  // namespace mouseleak
