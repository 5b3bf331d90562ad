#pragma once

#include <cstdint>
#include <string_view>
#include <filesystem>
#include <span>
#include <vector>

#include "mouseleak/audio_io.hpp"
#include "mouseleak/matrix.hpp"

namespace mouseleak::dsp {

struct FrameSeries {
  std::vector<std::vector<double>> frames;
  std::size_t window_len = 0;
  std::size_t hop_len = 0;
  int sample_rate = 0;
};

/// Frames start every hop_len samples while the start lies inside the clip;
/// a trailing partial frame is zero padded. An empty clip yields no frames.
FrameSeries frame_signal(const AudioClip& clip, double window_ms, double hop_ms);

enum class Window { Hann, Rectangular };

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// One-sided power spectrum of length floor(N/2)+1, scaled so that the bins
/// sum to the energy of the (windowed) frame.
std::vector<double> power_spectrum(std::span<const double> frame,
                                   Window window = Window::Hann);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Frequencies of the n_filters + 2 mel-spaced edge points, in Hz. Entry i+1
/// is the peak of filter i.
std::vector<double> mel_points_hz(std::size_t n_filters, double f_min, double f_max);

/// Triangular mel filters, n_filters x (n_fft/2 + 1). Peaks have unit height.
Matrix mel_filterbank(std::size_t n_filters, std::size_t n_fft, int sample_rate,
                      double f_min, double f_max);

struct MfccConfig {
  double window_ms = 36.0;
  double hop_ms = 18.0;
  std::size_t n_mfcc = 13;
  std::size_t n_filters = 26;
  double f_min = 0.0;
  double f_max = -1.0;  ///< negative means sample_rate / 2
  double log_floor = 1e-10;

  friend bool operator==(const MfccConfig&, const MfccConfig&) = default;
};

struct MfccMatrix {
  Matrix coeffs;  ///< frames x n_mfcc
  std::size_t window_len = 0;
  std::size_t hop_len = 0;
  int sample_rate = 0;

  std::size_t n_frames() const noexcept { return coeffs.rows(); }
  std::size_t n_mfcc() const noexcept { return coeffs.cols(); }
};

MfccMatrix mfcc(const AudioClip& clip, const MfccConfig& cfg = {});

/// Orthonormal DCT-II of the input, keeping the first n_out coefficients.
std::vector<double> dct2_orthonormal(std::span<const double> input, std::size_t n_out);

/// Per-coefficient z-score across frames. Zero-variance columns become zero.
MfccMatrix normalize_mfcc(const MfccMatrix& m);

enum class AmplitudeMode { Rms, MeanAbs };

struct AmplitudeProfile {
  std::vector<double> values;
  AmplitudeMode mode = AmplitudeMode::Rms;

  std::size_t n_windows() const noexcept { return values.size(); }
};

/// Boundaries [begin, end) of n contiguous spans covering `length` samples.
/// The first length % n spans are one sample longer.
std::vector<std::pair<std::size_t, std::size_t>> partition(std::size_t length,
                                                           std::size_t n);

AmplitudeProfile amplitude_profile(const AudioClip& clip, std::size_t n_windows = 50,
                                   AmplitudeMode mode = AmplitudeMode::Rms);
AmplitudeProfile amplitude_profile(std::span<const double> samples,
                                   std::size_t n_windows = 50,
                                   AmplitudeMode mode = AmplitudeMode::Rms);

double signal_power(const AudioClip& clip);

/// Zero-mean Gaussian noise with the given power (variance).
std::vector<double> gaussian_noise(std::size_t n, double power, std::uint64_t seed);

/// Adds Gaussian noise at the requested SNR against full-clip signal power.
AudioClip add_white_noise(const AudioClip& clip, double snr_db, std::uint64_t seed);

void write_mfcc_csv(const MfccMatrix& m, const std::filesystem::path& path);
void write_profile_csv(const AmplitudeProfile& p, const std::filesystem::path& path);

const char* to_string(AmplitudeMode mode);
AmplitudeMode amplitude_mode_from_string(std::string_view name);

}  // namespace mouseleak::dsp
