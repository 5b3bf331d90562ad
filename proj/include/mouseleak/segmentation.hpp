#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mouseleak/audio_io.hpp"

namespace mouseleak::segmentation {

enum class SegmentKind { Movement, Clap, Click, Silence };

const char* to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view name);

/// Time-bounded region of a recording. The label is free text; movement
/// segments normally carry a rendered direction label such as "TL→BR".
struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  SegmentKind kind = SegmentKind::Movement;
  std::optional<std::string> label;

  double duration_s() const noexcept { return end_s - start_s; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ClickEvent {
  double press_s = 0.0;
  double release_s = 0.0;
  double press_amplitude = 0.0;
  double release_amplitude = 0.0;

  double gap_ms() const noexcept { return (release_s - press_s) * 1000.0; }
};

struct Peak {
  double time_s = 0.0;
  double amplitude = 0.0;
};

/// Linear-interpolated quantile of |x| (numpy's default definition).
double abs_quantile(std::span<const double> samples, double q);

struct ActivityConfig {
  double threshold_quantile = 0.95;
  double min_len_ms = 100.0;
  double merge_gap_ms = 50.0;
  double envelope_ms = 10.0;
};

struct ActivityResult {
  std::vector<Segment> segments;
  double threshold = 0.0;
  /// Set when the quantile threshold reaches the signal maximum, so no sample
  /// can exceed it (silence, constant signals).
  bool degenerate = false;
};

/// Centred moving-RMS envelope with the given window length in samples.
std::vector<double> rms_envelope(std::span<const double> samples, std::size_t window);

ActivityResult detect_activity(const AudioClip& clip, const ActivityConfig& cfg = {});

struct ClapConfig {
  double quantile = 0.999;
  double min_separation_ms = 300.0;
  /// A clap must also exceed min_crest times the median |x|, so stationary
  /// noise alone never yields claps.
  double min_crest = 10.0;
};

/// Onset times of transients above the clap quantile. A transient within
/// min_separation of an accepted clap is suppressed, so the first of a close
/// pair wins.
std::vector<double> detect_claps(const AudioClip& clip, const ClapConfig& cfg = {});

/// Movement segments between consecutive clap pairs (0,1), (2,3), ... with a
/// guard trimmed from each side. Pairs too short to survive the guard yield
/// nothing.
std::vector<Segment> split_by_claps(const AudioClip& clip, std::span<const double> claps,
                                    double guard_s = 0.1);

struct PeakConfig {
  double quantile = 0.999;
  double refractory_ms = 5.0;
};

/// Local maxima of |x| above the quantile threshold with non-maximum
/// suppression: within refractory_ms only the largest peak survives.
std::vector<Peak> detect_peaks(const AudioClip& clip, const PeakConfig& cfg = {});

struct PairingConfig {
  double min_gap_ms = 10.0;
  double max_gap_ms = 200.0;
};

/// Greedy left-to-right press/release pairing. Peaks skipped over while
/// searching for a partner are dropped, which keeps events non-overlapping.
std::vector<ClickEvent> pair_clicks(std::span<const Peak> peaks,
                                    const PairingConfig& cfg = {});
std::vector<ClickEvent> pair_clicks(std::span<const double> peak_times,
                                    const PairingConfig& cfg = {});

AudioClip extract_click_window(const AudioClip& clip, const ClickEvent& click,
                               double pre_ms = 150.0, double post_ms = 150.0);

/// TSV with header "start_s\tend_s\tkind\tlabel"; timestamps carry 6
/// fractional digits and an absent label is written as an empty field.
void write_segments_tsv(std::span<const Segment> segments, const std::filesystem::path& path);
std::string format_segments_tsv(std::span<const Segment> segments);
std::vector<Segment> read_segments_tsv(const std::filesystem::path& path);
std::vector<Segment> parse_segments_tsv(const std::string& text,
                                        const std::string& source = "<string>");

std::vector<Segment> clicks_to_segments(std::span<const ClickEvent> clicks);

/// Waveform plot data: "time_s,amplitude,marker". Waveform rows have an empty
/// marker; each marker row carries its kind and label. The waveform is
/// reduced to the max-|x| sample of every `decimate` samples.
void write_plot_csv(const AudioClip& mono, std::span<const Segment> markers,
                    const std::filesystem::path& path, std::size_t decimate = 1);

}  // namespace mouseleak::segmentation
