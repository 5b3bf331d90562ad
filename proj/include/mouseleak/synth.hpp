#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mouseleak/audio_io.hpp"
#include "mouseleak/features.hpp"
#include "mouseleak/segmentation.hpp"

namespace mouseleak::synth {

/// Pad-plane coordinates. Origin at the top-left corner, x to the right,
/// y towards the bottom edge.
struct PadPosition {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PadPosition&, const PadPosition&) = default;
};

double distance(PadPosition a, PadPosition b);

/// Pad and microphone layout. With two mics, channel 0 is the mic nearer the
/// pad top. The default mimics a phone lying just right of the pad.
struct PadGeometry {
  double width = 12.0;
  double height = 12.0;
  std::vector<PadPosition> mics = {{13.0, 1.0}, {13.0, 11.0}};
  double d0 = 0.5;  ///< attenuation floor, avoids the 1/d singularity

  void validate() const;
  bool contains(PadPosition p) const;
  /// Pad point centres sit one twelfth of the pad in from each edge.
  PadPosition locate(features::PadPoint p) const;
};

struct Waypoint {
  double time_s = 0.0;
  PadPosition position;
  std::optional<features::PadPoint> point;
};

Waypoint waypoint_at(double time_s, features::PadPoint p, const PadGeometry& geom);

enum class SpeedProfile {
  PerLeg,    ///< each leg runs at its own speed, as timed by the waypoints
  Constant,  ///< interior waypoint times are ignored; speed is uniform
};

struct MovementScript {
  std::vector<Waypoint> waypoints;
  SpeedProfile speed = SpeedProfile::PerLeg;
  double band_low_hz = 1000.0;
  double band_high_hz = 8000.0;
  double base_amplitude = 0.1;

  void validate(const PadGeometry& geom) const;
  double start_s() const { return waypoints.front().time_s; }
  double end_s() const { return waypoints.back().time_s; }
  /// Source position at absolute time t, clamped to the script's span.
  PadPosition position_at(double t) const;
  /// "START→END" when both ends are named pad points.
  std::optional<features::DirectionLabel> label() const;
};

struct MovementClip {
  AudioClip clip;  ///< one channel per microphone, spanning the script
  std::optional<features::DirectionLabel> label;
};

/// Friction noise from a moving source. Each mic hears the same band-limited
/// Gaussian source scaled by base_amplitude / (distance + d0).
MovementClip synth_movement(const MovementScript& script, const PadGeometry& geom,
                            int sample_rate, std::uint64_t seed);

/// Unit-RMS Gaussian noise band-limited to [low_hz, high_hz] by second-order
/// Butterworth high- and low-pass sections.
std::vector<double> band_noise(std::size_t n, int sample_rate, double low_hz, double high_hz,
                               std::uint64_t seed);

struct ClickBounds {
  double min_gap_ms = 10.0;
  double max_gap_ms = 200.0;
};

/// Press and release transients: exponentially decaying sinusoids whose
/// first sample is the requested peak. The press is cut off at the release
/// onset so the release peak is exact.
AudioClip synth_click(double at_s, double gap_ms, std::pair<double, double> amplitudes,
                      double decay_ms, std::uint64_t seed, int sample_rate = 44100,
                      const ClickBounds& bounds = {});

struct MovementEvent {
  MovementScript script;
  std::optional<std::string> label;  ///< overrides the script's pad label
};

struct ClickSpec {
  double at_s = 0.0;
  double gap_ms = 50.0;
  double press_amplitude = 0.8;
  double release_amplitude = 0.6;
  double decay_ms = 3.0;
  std::optional<std::string> label;
};

struct ClapSpec {
  double at_s = 0.0;
  double amplitude = 0.95;
};

struct SilenceSpec {
  double start_s = 0.0;
  double end_s = 0.0;
};

using SceneEvent = std::variant<MovementEvent, ClickSpec, ClapSpec, SilenceSpec>;

/// Time extent of an event as rendered, [start, end).
std::pair<double, double> event_extent(const SceneEvent& e);

struct Scene {
  int sample_rate = 44100;
  std::uint64_t seed = 0;
  std::optional<double> noise_floor_db;  ///< RMS of the floor in dBFS
  std::optional<double> duration_s;
  PadGeometry geometry;
  std::vector<SceneEvent> events;
};

struct Session {
  AudioClip clip;
  std::vector<segmentation::Segment> labels;
};

/// Renders non-overlapping events over an optional Gaussian noise floor and
/// emits the matching label track.
Session synth_session(const Scene& scene);

/// Generator for the corner-to-corner direction benchmark.
struct DirectionBenchmark {
  std::size_t per_class = 100;
  double start_s = 0.5;
  double gap_s = 0.4;
  double min_duration_s = 0.5;
  double max_duration_s = 1.2;
  double amplitude_jitter = 0.25;  ///< relative, uniform in [-j, +j]
  double position_jitter = 0.4;    ///< pad units, uniform per coordinate
  double base_amplitude = 0.1;
  bool clap_brackets = false;      ///< clap before and after each movement
  std::vector<features::DirectionLabel> classes = features::corner_direction_classes();
};

/// A single randomized movement for the given class, starting at time 0.
MovementScript benchmark_movement(const features::DirectionLabel& label,
                                  const DirectionBenchmark& cfg, const PadGeometry& geom,
                                  std::uint64_t seed);

/// per_class movements for every class in shuffled order, laid end to end.
std::vector<SceneEvent> direction_benchmark_events(const DirectionBenchmark& cfg,
                                                   const PadGeometry& geom, std::uint64_t seed);

/// Scene scripts as JSON; unknown keys are rejected with the offending path.
Scene scene_from_json(const nlohmann::json& j);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mouseleak::synth
