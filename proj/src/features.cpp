#include "mouseleak/features.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "mouseleak/error.hpp"
#include "json_util.hpp"

namespace mouseleak::features {

namespace {

constexpr std::array<std::string_view, 9> kPadNames = {"TL", "TC", "TR", "ML", "MC",
                                                       "MR", "BL", "BC", "BR"};
constexpr std::array<std::string_view, 8> kCompassNames = {
    "Up", "UpRight", "Right", "DownRight", "Down", "DownLeft", "Left", "UpLeft"};

double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

}  // namespace

std::string_view to_string(PadPoint p) { return kPadNames[static_cast<std::size_t>(p)]; }

PadPoint pad_point_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kPadNames.size(); ++i) {
    if (kPadNames[i] == name) return static_cast<PadPoint>(i);
  }
  throw Error(ErrorCode::UnknownLabel, fmt::format("unknown pad point '{}'", name));
}

DirectionLabel::DirectionLabel(PadPoint s, PadPoint e) : start(s), end(e) {
  if (s == e) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("direction label needs distinct points, got {} twice", to_string(s)));
  }
}

std::string DirectionLabel::str() const {
  return fmt::format("{}→{}", to_string(start), to_string(end));
}

DirectionLabel DirectionLabel::parse(std::string_view text) {
  for (std::string_view sep : {std::string_view("→"), std::string_view("->")}) {
    auto pos = text.find(sep);
    if (pos != std::string_view::npos) {
      return DirectionLabel(pad_point_from_string(text.substr(0, pos)),
                            pad_point_from_string(text.substr(pos + sep.size())));
    }
  }
  throw Error(ErrorCode::UnknownLabel, fmt::format("malformed direction label '{}'", text));
}

std::vector<DirectionLabel> corner_direction_classes() {
  using P = PadPoint;
  const std::array<P, 4> corners = {P::TL, P::TR, P::BL, P::BR};
  std::vector<DirectionLabel> out;
  for (P a : corners) {
    for (P b : corners) {
      if (a != b) out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DirectionLabel& x, const DirectionLabel& y) { return x.str() < y.str(); });
  return out;
}

std::string_view to_string(Compass c) { return kCompassNames[static_cast<std::size_t>(c)]; }

double normalize_degrees(double deg) {
  if (!std::isfinite(deg)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("angle {} is not finite", deg));
  }
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

double displacement_to_angle(double dx, double dy, bool y_down) {
  if (dx == 0.0 && dy == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "displacement_to_angle: zero displacement");
  }
  const double up = y_down ? -dy : dy;
  return normalize_degrees(rad_to_deg(std::atan2(dx, up)));
}

Compass bin_angle(double angle_deg, int n_bins) {
  if (n_bins != 4 && n_bins != 8) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("n_bins must be 4 or 8, got {}", n_bins));
  }
  const double a = normalize_degrees(angle_deg);
  const double width = 360.0 / n_bins;
  const auto idx = static_cast<int>(std::floor((a + width / 2.0) / width)) % n_bins;
  return static_cast<Compass>(n_bins == 4 ? 2 * idx : idx);
}

UnitVector encode_angle(double angle_deg) {
  const double r = deg_to_rad(normalize_degrees(angle_deg));
  return {std::cos(r), std::sin(r)};
}

double decode_angle(double cos_val, double sin_val) {
  if (!(std::isfinite(cos_val) && std::isfinite(sin_val)) || (cos_val == 0.0 && sin_val == 0.0)) {
    throw Error(ErrorCode::Indeterminate, "decode_angle: zero or non-finite vector");
  }
  return normalize_degrees(rad_to_deg(std::atan2(sin_val, cos_val)));
}

double angular_error(double a_deg, double b_deg) {
  if (!std::isfinite(a_deg) || !std::isfinite(b_deg)) {
    throw Error(ErrorCode::InvalidArgument, "angular_error: non-finite angle");
  }
  const double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return std::min(d, 360.0 - d);
}

Trend fit_trend(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("trend needs at least 2 points, got {}", n));
  }
  const double x_mean = static_cast<double>(n - 1) / 2.0;
  double y_mean = 0.0;
  for (double v : values) y_mean += v;
  y_mean /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (values[i] - y_mean);
    sxx += dx * dx;
  }
  Trend t;
  t.slope = sxy / sxx;
  t.intercept = y_mean - t.slope * x_mean;
  t.n_points = n;
  return t;
}

Trend amplitude_trend(const dsp::AmplitudeProfile& profile) { return fit_trend(profile.values); }

std::string_view to_string(Proximity p) {
  switch (p) {
    case Proximity::TowardMic: return "toward_mic";
    case Proximity::AwayFromMic: return "away_from_mic";
    case Proximity::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Proximity slope_to_proximity(const Trend& trend, double epsilon) {
  if (trend.slope > epsilon) return Proximity::TowardMic;
  if (trend.slope < -epsilon) return Proximity::AwayFromMic;
  return Proximity::Indeterminate;
}

DiffLine difference_amplitude_line(const AudioClip& stereo, std::size_t n_windows,
                                   dsp::AmplitudeMode mode) {
  if (stereo.n_channels() != 2) {
    throw Error(ErrorCode::UnsupportedChannels,
                fmt::format("difference_amplitude_line expects stereo, got {} channel(s)",
                            stereo.n_channels()));
  }
  const auto top = dsp::amplitude_profile(stereo.samples(0), n_windows, mode);
  const auto bottom = dsp::amplitude_profile(stereo.samples(1), n_windows, mode);
  DiffLine out;
  out.values.resize(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) out.values[i] = top.values[i] - bottom.values[i];
  return out;
}

std::vector<AudioClip> chunk_continuous(const AudioClip& clip, std::size_t chunk_samples) {
  if (chunk_samples < 1) throw Error(ErrorCode::InvalidArgument, "chunk_samples must be >= 1");
  std::vector<AudioClip> chunks;
  const std::size_t n_chunks = clip.n_samples() / chunk_samples;
  for (std::size_t k = 0; k < n_chunks; ++k) {
    std::vector<std::vector<double>> channels;
    for (std::size_t c = 0; c < clip.n_channels(); ++c) {
      auto s = clip.samples(c).subspan(k * chunk_samples, chunk_samples);
      channels.emplace_back(s.begin(), s.end());
    }
    chunks.emplace_back(std::move(channels), clip.sample_rate(), clip.source_bit_depth());
  }
  return chunks;
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Mfcc: return "mfcc";
    case FeatureKind::AmplitudeProfile: return "amplitude_profile";
    case FeatureKind::DiffLine: return "diff_line";
  }
  return "diff_line";
}

FeatureKind feature_kind_from_string(std::string_view name) {
  if (name == "mfcc") return FeatureKind::Mfcc;
  if (name == "amplitude_profile" || name == "amplitude") return FeatureKind::AmplitudeProfile;
  if (name == "diff_line" || name == "diffline") return FeatureKind::DiffLine;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown feature kind '{}'", name));
}

nlohmann::json to_json(const FeaturizerConfig& cfg) {
  return {
      {"kind", std::string(to_string(cfg.kind))},
      {"n_windows", cfg.n_windows},
      {"mode", dsp::to_string(cfg.mode)},
      {"normalize_mfcc", cfg.normalize_mfcc},
      {"mfcc_frames", cfg.mfcc_frames},
      {"mfcc",
       {{"window_ms", cfg.mfcc.window_ms},
        {"hop_ms", cfg.mfcc.hop_ms},
        {"n_mfcc", cfg.mfcc.n_mfcc},
        {"n_filters", cfg.mfcc.n_filters},
        {"f_min", cfg.mfcc.f_min},
        {"f_max", cfg.mfcc.f_max},
        {"log_floor", cfg.mfcc.log_floor}}},
  };
}

FeaturizerConfig featurizer_from_json(const nlohmann::json& j) {
  using detail::JsonReader;
  FeaturizerConfig cfg;
  JsonReader r(j, "featurizer");
  if (auto v = r.opt<std::string>("kind")) cfg.kind = feature_kind_from_string(*v);
  r.get_to("n_windows", cfg.n_windows);
  if (auto v = r.opt<std::string>("mode")) cfg.mode = dsp::amplitude_mode_from_string(*v);
  r.get_to("normalize_mfcc", cfg.normalize_mfcc);
  r.get_to("mfcc_frames", cfg.mfcc_frames);
  if (auto m = r.child("mfcc")) {
    m->get_to("window_ms", cfg.mfcc.window_ms);
    m->get_to("hop_ms", cfg.mfcc.hop_ms);
    m->get_to("n_mfcc", cfg.mfcc.n_mfcc);
    m->get_to("n_filters", cfg.mfcc.n_filters);
    m->get_to("f_min", cfg.mfcc.f_min);
    m->get_to("f_max", cfg.mfcc.f_max);
    m->get_to("log_floor", cfg.mfcc.log_floor);
    m->finish();
  }
  r.finish();
  return cfg;
}

namespace {

std::vector<double> mfcc_rows(const AudioClip& clip, const FeaturizerConfig& cfg,
                              std::size_t& n_frames) {
  auto m = dsp::mfcc(to_mono(clip), cfg.mfcc);
  if (cfg.normalize_mfcc) m = dsp::normalize_mfcc(m);
  n_frames = m.n_frames();
  return m.coeffs.data();
}

std::vector<double> fit_rows(std::vector<double> flat, std::size_t row_width,
                             std::size_t rows) {
  flat.resize(rows * row_width, 0.0);
  return flat;
}

}  // namespace

std::vector<double> featurize(const AudioClip& clip, const FeaturizerConfig& cfg) {
  switch (cfg.kind) {
    case FeatureKind::Mfcc: {
      std::size_t frames = 0;
      auto flat = mfcc_rows(clip, cfg, frames);
      if (cfg.mfcc_frames == 0) return flat;
      return fit_rows(std::move(flat), cfg.mfcc.n_mfcc, cfg.mfcc_frames);
    }
    case FeatureKind::AmplitudeProfile:
      return dsp::amplitude_profile(to_mono(clip), cfg.n_windows, cfg.mode).values;
    case FeatureKind::DiffLine:
      return difference_amplitude_line(clip, cfg.n_windows, cfg.mode).values;
  }
  return {};
}

Dataset build_dataset(std::span<const LabeledVector> items,
                      const std::optional<std::vector<std::string>>& vocab) {
  Dataset ds;
  std::map<std::string, int> index;
  if (vocab) {
    ds.vocab = *vocab;
    for (std::size_t i = 0; i < ds.vocab.size(); ++i) index[ds.vocab[i]] = static_cast<int>(i);
  }
  const std::size_t width = items.empty() ? 0 : items.front().features.size();
  ds.features = Matrix(0, width);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (item.features.size() != width) {
      throw Error(ErrorCode::WidthMismatch,
                  fmt::format("item {} has {} features, expected {}", i, item.features.size(),
                              width));
    }
    auto it = index.find(item.label);
    if (it == index.end()) {
      if (vocab) {
        throw Error(ErrorCode::UnknownLabel,
                    fmt::format("item {}: label '{}' not in vocabulary", i, item.label));
      }
      it = index.emplace(item.label, static_cast<int>(ds.vocab.size())).first;
      ds.vocab.push_back(item.label);
    }
    ds.features.append_row(item.features);
    ds.labels.push_back(it->second);
  }
  return ds;
}

BuiltDataset build_dataset(std::span<const LabeledClip> items, FeaturizerConfig cfg,
                           const std::optional<std::vector<std::string>>& vocab) {
  std::vector<LabeledVector> vectors;
  vectors.reserve(items.size());
  if (cfg.kind == FeatureKind::Mfcc && cfg.mfcc_frames == 0) {
    std::vector<std::size_t> frame_counts;
    for (const auto& item : items) {
      std::size_t frames = 0;
      vectors.push_back({mfcc_rows(item.clip, cfg, frames), item.label});
      frame_counts.push_back(frames);
    }
    std::map<std::size_t, std::size_t> freq;
    for (auto f : frame_counts) ++freq[f];
    std::size_t modal = 0;
    std::size_t best = 0;
    for (auto [frames, count] : freq) {
      if (count > best) {
        best = count;
        modal = frames;
      }
    }
    cfg.mfcc_frames = modal;
    for (auto& v : vectors) v.features = fit_rows(std::move(v.features), cfg.mfcc.n_mfcc, modal);
  } else {
    for (const auto& item : items) vectors.push_back({featurize(item.clip, cfg), item.label});
  }
  return {build_dataset(std::span<const LabeledVector>(vectors), vocab), cfg};
}

void write_trend_csv(const AudioClip& clip, std::size_t n_windows, dsp::AmplitudeMode mode,
                     const std::filesystem::path& path) {
  std::vector<dsp::AmplitudeProfile> profiles;
  std::vector<Trend> trends;
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    profiles.push_back(dsp::amplitude_profile(clip.samples(c), n_windows, mode));
    trends.push_back(amplitude_trend(profiles.back()));
  }
  auto out = fmt::output_file(path.string());
  out.print("window");
  for (std::size_t c = 0; c < profiles.size(); ++c) out.print(",ch{0},ch{0}_fit", c);
  if (profiles.size() == 2) out.print(",diff");
  out.print("\n");
  for (std::size_t i = 0; i < n_windows; ++i) {
    out.print("{}", i);
    for (std::size_t c = 0; c < profiles.size(); ++c) {
      out.print(",{},{}", profiles[c].values[i], trends[c].at(static_cast<double>(i)));
    }
    if (profiles.size() == 2) out.print(",{}", profiles[0].values[i] - profiles[1].values[i]);
    out.print("\n");
  }
}

}  // namespace mouseleak::features
