#pragma once

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mouseleak/audio_io.hpp"
#include "mouseleak/dataset.hpp"
#include "mouseleak/dsp.hpp"

namespace mouseleak::features {

// Pad coordinate vocabulary. Rows: T(op) / M(iddle) / B(ottom).
// Columns: L(eft) / C(enter) / R(ight).
enum class PadPoint { TL, TC, TR, ML, MC, MR, BL, BC, BR };

std::string_view to_string(PadPoint p);
PadPoint pad_point_from_string(std::string_view name);

/// Movement class "START→END" over the pad vocabulary.
struct DirectionLabel {
  PadPoint start = PadPoint::TL;
  PadPoint end = PadPoint::BR;

  DirectionLabel() = default;
  DirectionLabel(PadPoint start, PadPoint end);

  std::string str() const;
  /// Accepts "TL→BR" and the ASCII form "TL->BR".
  static DirectionLabel parse(std::string_view text);

  friend bool operator==(const DirectionLabel&, const DirectionLabel&) = default;
};

/// The twelve back-and-forth classes over the pad corners.
std::vector<DirectionLabel> corner_direction_classes();

/// Compass bins clockwise from north. Four-bin results use only the cardinals.
enum class Compass { Up, UpRight, Right, DownRight, Down, DownLeft, Left, UpLeft };

std::string_view to_string(Compass c);

/// Angle of a displacement in degrees, clockwise from north, in [0, 360).
/// With y_down the displacement is in screen coordinates (+y points down).
double displacement_to_angle(double dx, double dy, bool y_down = true);

double normalize_degrees(double deg);

/// Half-open bins of width 360/n_bins centred on the compass directions; the
/// lower edge belongs to the bin (45 degrees is Right for four bins).
Compass bin_angle(double angle_deg, int n_bins = 4);

struct UnitVector {
  double cos_val = 1.0;
  double sin_val = 0.0;
};

UnitVector encode_angle(double angle_deg);
double decode_angle(double cos_val, double sin_val);
inline double decode_angle(UnitVector v) { return decode_angle(v.cos_val, v.sin_val); }

/// Smallest absolute difference between two bearings, in [0, 180].
double angular_error(double a_deg, double b_deg);

struct Trend {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;

  double at(double x) const noexcept { return intercept + slope * x; }
};

/// Ordinary least squares of values against their index 0..n-1.
Trend fit_trend(std::span<const double> values);
Trend amplitude_trend(const dsp::AmplitudeProfile& profile);

enum class Proximity { TowardMic, AwayFromMic, Indeterminate };

std::string_view to_string(Proximity p);
Proximity slope_to_proximity(const Trend& trend, double epsilon = 1e-9);

struct DiffLine {
  std::vector<double> values;
};

/// Per-window amplitude of channel 0 (top mic) minus channel 1 (bottom mic).
DiffLine difference_amplitude_line(const AudioClip& stereo, std::size_t n_windows = 50,
                                   dsp::AmplitudeMode mode = dsp::AmplitudeMode::Rms);

/// Consecutive non-overlapping chunks; a trailing remainder is dropped.
std::vector<AudioClip> chunk_continuous(const AudioClip& clip, std::size_t chunk_samples = 8192);

enum class FeatureKind { Mfcc, AmplitudeProfile, DiffLine };

std::string_view to_string(FeatureKind k);
FeatureKind feature_kind_from_string(std::string_view name);

/// How a clip becomes a fixed-width feature vector.
struct FeaturizerConfig {
  FeatureKind kind = FeatureKind::DiffLine;
  dsp::MfccConfig mfcc;
  bool normalize_mfcc = false;
  std::size_t n_windows = 50;
  dsp::AmplitudeMode mode = dsp::AmplitudeMode::Rms;
  /// MFCC rows kept per sample; 0 means "modal frame count of the dataset".
  std::size_t mfcc_frames = 0;

  friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

nlohmann::json to_json(const FeaturizerConfig& cfg);
FeaturizerConfig featurizer_from_json(const nlohmann::json& j);

/// Raw feature vector of one clip. MFCC matrices are flattened row-major and
/// padded or truncated to cfg.mfcc_frames rows when that is non-zero.
std::vector<double> featurize(const AudioClip& clip, const FeaturizerConfig& cfg);

struct LabeledClip {
  AudioClip clip;
  std::string label;
};

struct BuiltDataset {
  Dataset dataset;
  FeaturizerConfig featurizer;  ///< with mfcc_frames resolved
};

/// Featurizes each clip and encodes labels in first-seen order. When
/// `vocab` is given, labels must come from it and keep its indices.
BuiltDataset build_dataset(std::span<const LabeledClip> items, FeaturizerConfig cfg,
                           const std::optional<std::vector<std::string>>& vocab = std::nullopt);

struct LabeledVector {
  std::vector<double> features;
  std::string label;
};

Dataset build_dataset(std::span<const LabeledVector> items,
                      const std::optional<std::vector<std::string>>& vocab = std::nullopt);

/// Plot data for the dual-mic figures: per-window amplitude of each channel,
/// their OLS lines, and the difference line.
void write_trend_csv(const AudioClip& clip, std::size_t n_windows, dsp::AmplitudeMode mode,
                     const std::filesystem::path& path);

}  // namespace mouseleak::features
