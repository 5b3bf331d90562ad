#include "mouseleak/dsp.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "mouseleak/error.hpp"

namespace mouseleak::dsp {

namespace {

void require_mono(const AudioClip& clip, const char* op) {
  if (!clip.is_mono()) {
    throw Error(ErrorCode::UnsupportedChannels,
                fmt::format("{} expects a mono clip, got {} channels", op,
                            clip.n_channels()));
  }
}

}  // namespace

FrameSeries frame_signal(const AudioClip& clip, double window_ms, double hop_ms) {
  require_mono(clip, "frame_signal");
  if (!(window_ms > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("window_ms must be positive, got {}", window_ms));
  }
  if (!(hop_ms > 0.0) || hop_ms > window_ms) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("hop_ms must be in (0, window_ms], got {}", hop_ms));
  }
  const double rate = clip.sample_rate();
  FrameSeries out;
  out.sample_rate = clip.sample_rate();
  out.window_len = std::max<std::size_t>(1, std::lround(window_ms * rate / 1000.0));
  out.hop_len = std::clamp<std::size_t>(std::lround(hop_ms * rate / 1000.0), 1,
                                        out.window_len);

  auto x = clip.samples();
  for (std::size_t start = 0; start < x.size(); start += out.hop_len) {
    std::vector<double> frame(out.window_len, 0.0);
    std::size_t n = std::min(out.window_len, x.size() - start);
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), n, frame.begin());
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

namespace {

// Shared by power_spectrum and mfcc so the per-frame path is identical.
void one_sided_power(detail::RealFft& fft, std::span<double> out) {
  const auto spectrum = fft.execute();
  const std::size_t n = fft.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    double p = std::norm(spectrum[k]) * inv_n;
    bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    out[k] = unpaired ? p : 2.0 * p;
  }
}

}  // namespace

std::vector<double> power_spectrum(std::span<const double> frame, Window window) {
  if (frame.empty()) {
    throw Error(ErrorCode::EmptyInput, "power_spectrum: empty frame");
  }
  detail::RealFft fft(frame.size());
  auto in = fft.input();
  if (window == Window::Hann) {
    auto w = hann_window(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) in[i] = frame[i] * w[i];
  } else {
    std::copy(frame.begin(), frame.end(), in.begin());
  }
  std::vector<double> out(fft.bins());
  one_sided_power(fft, out);
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_points_hz(std::size_t n_filters, double f_min, double f_max) {
  const double lo = hz_to_mel(f_min);
  const double hi = hz_to_mel(f_max);
  std::vector<double> pts(n_filters + 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double mel = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_filters + 1);
    pts[i] = mel_to_hz(mel);
  }
  return pts;
}

Matrix mel_filterbank(std::size_t n_filters, std::size_t n_fft, int sample_rate,
                      double f_min, double f_max) {
  if (n_filters < 1) throw Error(ErrorCode::InvalidArgument, "n_filters must be >= 1");
  if (n_fft < 1) throw Error(ErrorCode::InvalidArgument, "n_fft must be >= 1");
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample_rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(f_min >= 0.0) || !(f_min < f_max) || !(f_max <= nyquist)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("mel_filterbank: need 0 <= f_min < f_max <= {}, got f_min={} "
                            "f_max={}",
                            nyquist, f_min, f_max));
  }

  const auto edges = mel_points_hz(n_filters, f_min, f_max);
  const std::size_t bins = n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n_fft);
  Matrix fb(n_filters, bins);
  for (std::size_t m = 0; m < n_filters; ++m) {
    const double left = edges[m];
    const double centre = edges[m + 1];
    const double right = edges[m + 2];
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= centre) {
        w = (f - left) / (centre - left);
      } else if (f > centre && f < right) {
        w = (right - f) / (right - centre);
      }
      fb(m, k) = w;
      any = any || w > 0.0;
    }
    // Filters narrower than one bin would otherwise be empty.
    if (!any) {
      auto k = std::min<std::size_t>(bins - 1, std::lround(centre / bin_hz));
      fb(m, k) = 1.0;
    }
  }
  return fb;
}

std::vector<double> dct2_orthonormal(std::span<const double> input, std::size_t n_out) {
  const std::size_t n = input.size();
  std::vector<double> out(n_out, 0.0);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += input[i] * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(i) + 1.0) /
                                 (2.0 * static_cast<double>(n)));
    }
    out[k] = (k == 0 ? s0 : sk) * acc;
  }
  return out;
}

MfccMatrix mfcc(const AudioClip& clip, const MfccConfig& cfg) {
  require_mono(clip, "mfcc");
  if (clip.empty()) throw Error(ErrorCode::EmptyInput, "mfcc: empty clip");
  if (cfg.n_mfcc < 1 || cfg.n_mfcc > cfg.n_filters) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("n_mfcc must be in [1, n_filters={}], got {}", cfg.n_filters,
                            cfg.n_mfcc));
  }
  const double f_max = cfg.f_max < 0.0 ? clip.sample_rate() / 2.0 : cfg.f_max;

  const FrameSeries frames = frame_signal(clip, cfg.window_ms, cfg.hop_ms);
  const std::size_t n = frames.window_len;
  const Matrix fb = mel_filterbank(cfg.n_filters, n, clip.sample_rate(), cfg.f_min, f_max);
  const auto window = hann_window(n);

  // Cosine table for the DCT, shared across frames.
  Matrix dct(cfg.n_mfcc, cfg.n_filters);
  for (std::size_t k = 0; k < cfg.n_mfcc; ++k) {
    const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(cfg.n_filters));
    for (std::size_t i = 0; i < cfg.n_filters; ++i) {
      dct(k, i) = s * std::cos(std::numbers::pi * static_cast<double>(k) *
                               (2.0 * static_cast<double>(i) + 1.0) /
                               (2.0 * static_cast<double>(cfg.n_filters)));
    }
  }

  detail::RealFft fft(n);
  std::vector<double> power(fft.bins());
  std::vector<double> log_energy(cfg.n_filters);
  MfccMatrix out;
  out.coeffs = Matrix(frames.frames.size(), cfg.n_mfcc);
  out.window_len = frames.window_len;
  out.hop_len = frames.hop_len;
  out.sample_rate = frames.sample_rate;

  for (std::size_t f = 0; f < frames.frames.size(); ++f) {
    auto in = fft.input();
    const auto& frame = frames.frames[f];
    for (std::size_t i = 0; i < n; ++i) in[i] = frame[i] * window[i];
    one_sided_power(fft, power);
    for (std::size_t m = 0; m < cfg.n_filters; ++m) {
      auto weights = fb.row(m);
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += weights[k] * power[k];
      log_energy[m] = std::log(e + cfg.log_floor);
    }
    for (std::size_t k = 0; k < cfg.n_mfcc; ++k) {
      auto basis = dct.row(k);
      double acc = 0.0;
      for (std::size_t i = 0; i < cfg.n_filters; ++i) acc += basis[i] * log_energy[i];
      out.coeffs(f, k) = acc;
    }
  }
  return out;
}

MfccMatrix normalize_mfcc(const MfccMatrix& m) {
  const std::size_t rows = m.coeffs.rows();
  if (rows < 2) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("normalize_mfcc needs at least 2 frames, got {}", rows));
  }
  MfccMatrix out = m;
  for (std::size_t c = 0; c < m.coeffs.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mean += m.coeffs(r, c);
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = m.coeffs(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(rows);
    const double sd = std::sqrt(var);
    // Relative cutoff so constant columns that picked up rounding noise in
    // the mean still count as zero-variance.
    const bool flat = sd <= 1e-12 * std::max(1.0, std::abs(mean));
    for (std::size_t r = 0; r < rows; ++r) {
      out.coeffs(r, c) = flat ? 0.0 : (m.coeffs(r, c) - mean) / sd;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> partition(std::size_t length,
                                                           std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  spans.reserve(n);
  const std::size_t base = length / n;
  const std::size_t extra = length % n;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    spans.emplace_back(begin, begin + len);
    begin += len;
  }
  return spans;
}

AmplitudeProfile amplitude_profile(std::span<const double> samples, std::size_t n_windows,
                                   AmplitudeMode mode) {
  if (n_windows < 1) throw Error(ErrorCode::InvalidArgument, "n_windows must be >= 1");
  if (samples.size() < n_windows) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("amplitude_profile: clip has {} samples, fewer than "
                            "n_windows={}",
                            samples.size(), n_windows));
  }
  AmplitudeProfile p;
  p.mode = mode;
  p.values.reserve(n_windows);
  for (auto [begin, end] : partition(samples.size(), n_windows)) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      acc += mode == AmplitudeMode::Rms ? samples[i] * samples[i] : std::abs(samples[i]);
    }
    acc /= static_cast<double>(end - begin);
    p.values.push_back(mode == AmplitudeMode::Rms ? std::sqrt(acc) : acc);
  }
  return p;
}

AmplitudeProfile amplitude_profile(const AudioClip& clip, std::size_t n_windows,
                                   AmplitudeMode mode) {
  require_mono(clip, "amplitude_profile");
  if (clip.empty()) throw Error(ErrorCode::EmptyInput, "amplitude_profile: empty clip");
  return amplitude_profile(clip.samples(), n_windows, mode);
}

double signal_power(const AudioClip& clip) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    for (double s : clip.samples(c)) acc += s * s;
    count += clip.n_samples();
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

std::vector<double> gaussian_noise(std::size_t n, double power, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(power));
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

AudioClip add_white_noise(const AudioClip& clip, double snr_db, std::uint64_t seed) {
  if (!std::isfinite(snr_db)) {
    throw Error(ErrorCode::InvalidArgument, "snr_db must be finite");
  }
  const double p_signal = signal_power(clip);
  if (!(p_signal > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "add_white_noise: clip has zero signal power");
  }
  const double p_noise = p_signal / std::pow(10.0, snr_db / 10.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(p_noise));
  std::vector<std::vector<double>> channels;
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    auto s = clip.samples(c);
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      out[i] = std::clamp(s[i] + dist(rng), -1.0, 1.0);
    }
    channels.push_back(std::move(out));
  }
  return AudioClip(std::move(channels), clip.sample_rate(), clip.source_bit_depth());
}

void write_mfcc_csv(const MfccMatrix& m, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("frame");
  for (std::size_t k = 0; k < m.n_mfcc(); ++k) out.print(",c{}", k);
  out.print("\n");
  for (std::size_t r = 0; r < m.n_frames(); ++r) {
    out.print("{}", r);
    for (double v : m.coeffs.row(r)) out.print(",{}", v);
    out.print("\n");
  }
}

void write_profile_csv(const AmplitudeProfile& p, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("window,{}\n", to_string(p.mode));
  for (std::size_t i = 0; i < p.values.size(); ++i) out.print("{},{}\n", i, p.values[i]);
}

const char* to_string(AmplitudeMode mode) {
  return mode == AmplitudeMode::Rms ? "rms" : "mean_abs";
}

AmplitudeMode amplitude_mode_from_string(std::string_view name) {
  if (name == "rms") return AmplitudeMode::Rms;
  if (name == "mean_abs") return AmplitudeMode::MeanAbs;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown amplitude mode '{}'", name));
}

}  // namespace mouseleak::dsp
