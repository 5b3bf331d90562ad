#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. They deliberately avoid the library's FFT, filterbank and DCT code.

#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mouseleak/audio_io.hpp"

namespace oracle {

inline std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

inline mouseleak::AudioClip random_clip(std::size_t n, int rate, std::uint64_t seed,
                                        double amp = 1.0) {
  return mouseleak::AudioClip::mono(uniform_samples(n, seed, amp), rate);
}

/// O(N^2) DFT of a real sequence, bins 0..N/2.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    cos_table[i] = std::cos(phase);
    sin_table[i] = std::sin(phase);
  }
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += x[t] * cos_table[idx];
      im -= x[t] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = {re, im};
  }
  return out;
}

/// One-sided power with interior bins doubled, normalised by N.
inline std::vector<double> naive_power(const std::vector<double>& frame, bool hann) {
  const std::size_t n = frame.size();
  std::vector<double> x = frame;
  if (hann) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  const auto spec = naive_dft(x);
  std::vector<double> p(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    p[k] = std::norm(spec[k]) / static_cast<double>(n) * (edge ? 1.0 : 2.0);
  }
  return p;
}

inline double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double inv_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

/// Edge frequencies of n_filters triangles, evenly spaced in mel.
inline std::vector<double> mel_edges(std::size_t n_filters, double f_min, double f_max) {
  std::vector<double> edges(n_filters + 2);
  const double lo = mel(f_min), hi = mel(f_max);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = inv_mel(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_filters + 1));
  }
  return edges;
}

inline double triangle(double f, double left, double centre, double right) {
  if (f <= left || f >= right) return 0.0;
  return f <= centre ? (f - left) / (centre - left) : (right - f) / (right - centre);
}

inline std::vector<double> textbook_dct2(const std::vector<double>& x, std::size_t n_out) {
  const std::size_t n = x.size();
  std::vector<double> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::cos(std::numbers::pi * static_cast<double>(k) *
                             (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
    }
    out[k] = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
  }
  return out;
}

/// Frames -> Hann -> naive DFT power -> explicit triangles -> log -> DCT-II.
inline std::vector<std::vector<double>> reference_mfcc(const std::vector<double>& x, int rate,
                                                       double window_ms = 36.0,
                                                       double hop_ms = 18.0,
                                                       std::size_t n_mfcc = 13,
                                                       std::size_t n_filters = 26) {
  const auto win = static_cast<std::size_t>(std::lround(window_ms * rate / 1000.0));
  const auto hop = static_cast<std::size_t>(std::lround(hop_ms * rate / 1000.0));
  const auto edges = mel_edges(n_filters, 0.0, rate / 2.0);
  std::vector<std::vector<double>> rows;
  for (std::size_t start = 0; start < x.size(); start += hop) {
    std::vector<double> frame(win, 0.0);
    for (std::size_t i = 0; i < win && start + i < x.size(); ++i) frame[i] = x[start + i];
    const auto power = naive_power(frame, true);
    std::vector<double> energies(n_filters, 0.0);
    for (std::size_t m = 0; m < n_filters; ++m) {
      for (std::size_t k = 0; k < power.size(); ++k) {
        const double f = static_cast<double>(k) * rate / static_cast<double>(win);
        energies[m] += power[k] * triangle(f, edges[m], edges[m + 1], edges[m + 2]);
      }
      energies[m] = std::log(energies[m] + 1e-10);
    }
    rows.push_back(textbook_dct2(energies, n_mfcc));
  }
  return rows;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("mouseleak-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
