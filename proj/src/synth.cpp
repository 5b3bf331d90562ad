#include "mouseleak/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mouseleak/dsp.hpp"
#include "mouseleak/error.hpp"
#include "json_util.hpp"

namespace mouseleak::synth {

namespace {

constexpr double kClapDurationS = 0.1;
constexpr double kClapDecayS = 0.015;

struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

Biquad butterworth(double freq, int rate, bool highpass) {
  const double w0 = 2.0 * std::numbers::pi * freq / rate;
  const double alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad q{};
  if (highpass) {
    q.b0 = (1.0 + c) / 2.0 / a0;
    q.b1 = -(1.0 + c) / a0;
  } else {
    q.b0 = (1.0 - c) / 2.0 / a0;
    q.b1 = (1.0 - c) / a0;
  }
  q.b2 = q.b0;
  q.a1 = -2.0 * c / a0;
  q.a2 = (1.0 - alpha) / a0;
  return q;
}

std::size_t to_index(double t, int rate) {
  return static_cast<std::size_t>(std::max(0L, std::lround(t * rate)));
}

// Adds one decaying sinusoid starting at `start` into `buf`, stopping before
// `stop`. The first sample equals `amplitude`.
void add_impulse(std::vector<double>& buf, std::size_t start, std::size_t stop, double amplitude,
                 double decay_s, double freq_hz, int rate) {
  stop = std::min(stop, buf.size());
  for (std::size_t i = start; i < stop; ++i) {
    const double t = static_cast<double>(i - start) / rate;
    buf[i] += amplitude * std::exp(-t / decay_s) * std::cos(2.0 * std::numbers::pi * freq_hz * t);
  }
}

void add_clap(std::vector<double>& buf, std::size_t start, double amplitude, int rate,
              std::uint64_t seed) {
  const std::size_t n = std::min(to_index(kClapDurationS, rate), buf.size() - std::min(buf.size(), start));
  if (n == 0) return;
  auto noise = dsp::gaussian_noise(n, 1.0, seed);
  double peak = 0.0;
  for (double v : noise) peak = std::max(peak, std::abs(v));
  noise[0] = peak;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    buf[start + i] += amplitude * std::exp(-t / kClapDecayS) * noise[i] / peak;
  }
}

}  // namespace

double distance(PadPosition a, PadPosition b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void PadGeometry::validate() const {
  if (!(width > 0.0 && height > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pad width and height must be positive");
  }
  if (!(d0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "attenuation floor d0 must be positive");
  if (mics.empty() || mics.size() > 2) {
    throw Error(ErrorCode::UnsupportedChannels,
                fmt::format("geometry needs 1 or 2 mics, got {}", mics.size()));
  }
  if (mics.size() == 2 && mics[0] == mics[1]) {
    throw Error(ErrorCode::InvalidArgument, "microphone positions must be distinct");
  }
}

bool PadGeometry::contains(PadPosition p) const {
  return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
}

PadPosition PadGeometry::locate(features::PadPoint p) const {
  const auto idx = static_cast<int>(p);
  const int row = idx / 3;
  const int col = idx % 3;
  const double xs[] = {width / 12.0, width / 2.0, width * 11.0 / 12.0};
  const double ys[] = {height / 12.0, height / 2.0, height * 11.0 / 12.0};
  return {xs[col], ys[row]};
}

Waypoint waypoint_at(double time_s, features::PadPoint p, const PadGeometry& geom) {
  return {time_s, geom.locate(p), p};
}

void MovementScript::validate(const PadGeometry& geom) const {
  if (waypoints.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "movement script needs at least 2 waypoints");
  }
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (i > 0 && !(waypoints[i].time_s > waypoints[i - 1].time_s)) {
      throw Error(ErrorCode::UnsortedInput,
                  fmt::format("waypoint {}: times must be strictly increasing", i));
    }
    if (!geom.contains(waypoints[i].position)) {
      throw Error(ErrorCode::IndexOutOfRange,
                  fmt::format("waypoint {} at ({}, {}) lies outside the {}x{} pad", i,
                              waypoints[i].position.x, waypoints[i].position.y, geom.width,
                              geom.height));
    }
  }
  if (waypoints.front().time_s < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "waypoint times must be non-negative");
  }
  if (!(base_amplitude > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "base_amplitude must be positive");
  }
  if (!(band_low_hz >= 0.0 && band_low_hz < band_high_hz)) {
    throw Error(ErrorCode::InvalidArgument, "noise band needs 0 <= low < high");
  }
}

PadPosition MovementScript::position_at(double t) const {
  const auto& w = waypoints;
  t = std::clamp(t, w.front().time_s, w.back().time_s);
  auto lerp = [](PadPosition a, PadPosition b, double f) {
    return PadPosition{a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
  };
  if (speed == SpeedProfile::PerLeg) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (t <= w[i].time_s) {
        const double f = (t - w[i - 1].time_s) / (w[i].time_s - w[i - 1].time_s);
        return lerp(w[i - 1].position, w[i].position, f);
      }
    }
    return w.back().position;
  }
  double total = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) total += distance(w[i - 1].position, w[i].position);
  if (total == 0.0) return w.front().position;
  double target = total * (t - w.front().time_s) / (w.back().time_s - w.front().time_s);
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double leg = distance(w[i - 1].position, w[i].position);
    if (target <= leg && leg > 0.0) return lerp(w[i - 1].position, w[i].position, target / leg);
    target -= leg;
  }
  return w.back().position;
}

std::optional<features::DirectionLabel> MovementScript::label() const {
  if (waypoints.empty()) return std::nullopt;
  const auto& a = waypoints.front().point;
  const auto& b = waypoints.back().point;
  if (!a || !b || *a == *b) return std::nullopt;
  return features::DirectionLabel(*a, *b);
}

std::vector<double> band_noise(std::size_t n, int sample_rate, double low_hz, double high_hz,
                               std::uint64_t seed) {
  // Warm-up samples let the filters settle before the kept segment.
  constexpr std::size_t kWarmup = 2048;
  auto raw = dsp::gaussian_noise(n + kWarmup, 1.0, seed);
  const double nyquist = sample_rate / 2.0;
  std::optional<Biquad> hp;
  std::optional<Biquad> lp;
  if (low_hz > 0.0 && low_hz < nyquist) hp = butterworth(low_hz, sample_rate, true);
  if (high_hz < 0.95 * nyquist) lp = butterworth(high_hz, sample_rate, false);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double v = raw[i];
    if (hp) v = hp->step(v);
    if (lp) v = lp->step(v);
    if (i >= kWarmup) out[i - kWarmup] = v;
  }
  double energy = 0.0;
  for (double v : out) energy += v * v;
  if (energy > 0.0) {
    const double scale = 1.0 / std::sqrt(energy / static_cast<double>(n));
    for (double& v : out) v *= scale;
  }
  return out;
}

MovementClip synth_movement(const MovementScript& script, const PadGeometry& geom,
                            int sample_rate, std::uint64_t seed) {
  geom.validate();
  script.validate(geom);
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample_rate must be positive");
  const double t0 = script.start_s();
  const auto n = static_cast<std::size_t>(std::lround((script.end_s() - t0) * sample_rate));
  const auto source =
      band_noise(n, sample_rate, script.band_low_hz, script.band_high_hz, seed);

  std::vector<std::vector<double>> channels(geom.mics.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const PadPosition pos = script.position_at(t0 + static_cast<double>(i) / sample_rate);
    for (std::size_t m = 0; m < geom.mics.size(); ++m) {
      const double gain = script.base_amplitude / (distance(pos, geom.mics[m]) + geom.d0);
      channels[m][i] = std::clamp(gain * source[i], -1.0, 1.0);
    }
  }
  return {AudioClip(std::move(channels), sample_rate), script.label()};
}

AudioClip synth_click(double at_s, double gap_ms, std::pair<double, double> amplitudes,
                      double decay_ms, std::uint64_t seed, int sample_rate,
                      const ClickBounds& bounds) {
  if (!(gap_ms >= bounds.min_gap_ms && gap_ms <= bounds.max_gap_ms)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("click gap {} ms outside [{}, {}] ms", gap_ms, bounds.min_gap_ms,
                            bounds.max_gap_ms));
  }
  auto [press, release] = amplitudes;
  if (!(press > 0.0 && press <= 1.0 && release > 0.0 && release <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "click amplitudes must lie in (0, 1]");
  }
  if (!(decay_ms > 0.0) || !(at_s >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "click needs decay_ms > 0 and at_s >= 0");
  }
  const double decay_s = decay_ms / 1000.0;
  const std::size_t press_idx = to_index(at_s, sample_rate);
  const std::size_t release_idx = to_index(at_s + gap_ms / 1000.0, sample_rate);
  const std::size_t end_idx = release_idx + to_index(10.0 * decay_s, sample_rate);
  std::vector<double> buf(end_idx, 0.0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(2000.0, 5000.0);
  const double press_freq = freq(rng);
  const double release_freq = freq(rng);
  add_impulse(buf, press_idx, release_idx, press, decay_s, press_freq, sample_rate);
  add_impulse(buf, release_idx, end_idx, release, decay_s, release_freq, sample_rate);
  for (double& v : buf) v = std::clamp(v, -1.0, 1.0);
  return AudioClip::mono(std::move(buf), sample_rate);
}

std::pair<double, double> event_extent(const SceneEvent& e) {
  return std::visit(
      [](const auto& ev) -> std::pair<double, double> {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, MovementEvent>) {
          return {ev.script.start_s(), ev.script.end_s()};
        } else if constexpr (std::is_same_v<T, ClickSpec>) {
          return {ev.at_s, ev.at_s + ev.gap_ms / 1000.0 + 10.0 * ev.decay_ms / 1000.0};
        } else if constexpr (std::is_same_v<T, ClapSpec>) {
          return {ev.at_s, ev.at_s + kClapDurationS};
        } else {
          return {ev.start_s, ev.end_s};
        }
      },
      e);
}

Session synth_session(const Scene& scene) {
  scene.geometry.validate();
  const int rate = scene.sample_rate;
  if (rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample_rate must be positive");

  std::vector<std::size_t> order(scene.events.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::pair<double, double>> extents;
  for (const auto& e : scene.events) {
    if (const auto* m = std::get_if<MovementEvent>(&e)) m->script.validate(scene.geometry);
    extents.push_back(event_extent(e));
    if (!(extents.back().first >= 0.0 && extents.back().first < extents.back().second)) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("event {}: needs 0 <= start < end", extents.size() - 1));
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return extents[a].first < extents[b].first; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto prev = order[i - 1];
    const auto cur = order[i];
    if (extents[cur].first < extents[prev].second) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("events {} and {} overlap ({:.6f} s < {:.6f} s)", prev, cur,
                              extents[cur].first, extents[prev].second));
    }
  }

  double duration = 1.0;
  if (scene.duration_s) {
    duration = *scene.duration_s;
  } else if (!order.empty()) {
    duration = extents[order.back()].second + 0.25;
  }
  for (const auto& [start, end] : extents) {
    if (end > duration + 1e-9) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("event ending at {:.6f} s exceeds duration {:.6f} s", end, duration));
    }
  }
  const std::size_t n = to_index(duration, rate);
  const std::size_t n_channels = scene.geometry.mics.size();
  std::vector<std::vector<double>> channels(n_channels, std::vector<double>(n, 0.0));

  if (scene.noise_floor_db) {
    const double rms = std::pow(10.0, *scene.noise_floor_db / 20.0);
    for (std::size_t c = 0; c < n_channels; ++c) {
      auto noise = dsp::gaussian_noise(n, rms * rms, derive_seed(scene.seed, 1000000 + c));
      for (std::size_t i = 0; i < n; ++i) channels[c][i] += noise[i];
    }
  }

  Session session;
  for (std::size_t idx : order) {
    const auto& event = scene.events[idx];
    const std::uint64_t seed = derive_seed(scene.seed, idx);
    const std::size_t offset = to_index(extents[idx].first, rate);
    using segmentation::SegmentKind;
    if (const auto* m = std::get_if<MovementEvent>(&event)) {
      auto moved = synth_movement(m->script, scene.geometry, rate, seed);
      for (std::size_t c = 0; c < n_channels; ++c) {
        auto s = moved.clip.samples(c);
        for (std::size_t i = 0; i < s.size() && offset + i < n; ++i) channels[c][offset + i] += s[i];
      }
      std::optional<std::string> label = m->label;
      if (!label && moved.label) label = moved.label->str();
      session.labels.push_back({extents[idx].first, extents[idx].second, SegmentKind::Movement, label});
    } else if (const auto* k = std::get_if<ClickSpec>(&event)) {
      auto click = synth_click(0.0, k->gap_ms, {k->press_amplitude, k->release_amplitude},
                               k->decay_ms, seed, rate);
      auto s = click.samples();
      for (std::size_t c = 0; c < n_channels; ++c) {
        for (std::size_t i = 0; i < s.size() && offset + i < n; ++i) channels[c][offset + i] += s[i];
      }
      session.labels.push_back(
          {k->at_s, k->at_s + k->gap_ms / 1000.0, SegmentKind::Click, k->label});
    } else if (const auto* clap = std::get_if<ClapSpec>(&event)) {
      std::vector<double> burst(to_index(kClapDurationS, rate), 0.0);
      add_clap(burst, 0, clap->amplitude, rate, seed);
      for (std::size_t c = 0; c < n_channels; ++c) {
        for (std::size_t i = 0; i < burst.size() && offset + i < n; ++i) {
          channels[c][offset + i] += burst[i];
        }
      }
      session.labels.push_back(
          {extents[idx].first, extents[idx].second, SegmentKind::Clap, std::nullopt});
    } else {
      session.labels.push_back(
          {extents[idx].first, extents[idx].second, SegmentKind::Silence, std::nullopt});
    }
  }

  for (auto& ch : channels) {
    for (double& v : ch) v = std::clamp(v, -1.0, 1.0);
  }
  session.clip = AudioClip(std::move(channels), rate);
  return session;
}

MovementScript benchmark_movement(const features::DirectionLabel& label,
                                  const DirectionBenchmark& cfg, const PadGeometry& geom,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto jitter = [&](double span) { return (2.0 * unit(rng) - 1.0) * span; };
  auto place = [&](features::PadPoint p) {
    PadPosition pos = geom.locate(p);
    pos.x = std::clamp(pos.x + jitter(cfg.position_jitter), 0.0, geom.width);
    pos.y = std::clamp(pos.y + jitter(cfg.position_jitter), 0.0, geom.height);
    return pos;
  };
  const PadPosition a = place(label.start);
  const PadPosition b = place(label.end);
  const double duration = cfg.min_duration_s + unit(rng) * (cfg.max_duration_s - cfg.min_duration_s);
  // Uneven legs make the speed vary within a stroke.
  const double mid_frac = 0.35 + 0.3 * unit(rng);
  MovementScript script;
  script.speed = SpeedProfile::PerLeg;
  script.base_amplitude = cfg.base_amplitude * (1.0 + jitter(cfg.amplitude_jitter));
  script.waypoints = {
      {0.0, a, label.start},
      {mid_frac * duration, {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}, std::nullopt},
      {duration, b, label.end},
  };
  return script;
}

std::vector<SceneEvent> direction_benchmark_events(const DirectionBenchmark& cfg,
                                                   const PadGeometry& geom, std::uint64_t seed) {
  if (cfg.classes.empty()) throw Error(ErrorCode::InvalidArgument, "benchmark needs classes");
  std::vector<std::size_t> plan;
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    for (std::size_t k = 0; k < cfg.per_class; ++k) plan.push_back(c);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(plan.begin(), plan.end(), rng);

  std::vector<SceneEvent> events;
  double t = cfg.start_s;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    auto script = benchmark_movement(cfg.classes[plan[i]], cfg, geom, derive_seed(seed, i));
    if (cfg.clap_brackets) {
      events.push_back(ClapSpec{t, 0.95});
      t += kClapDurationS;
    }
    const double duration = script.end_s();
    for (auto& w : script.waypoints) w.time_s += t;
    events.push_back(MovementEvent{std::move(script), std::nullopt});
    t += duration;
    if (cfg.clap_brackets) {
      t += kClapDurationS;
      events.push_back(ClapSpec{t, 0.95});
      t += std::max(cfg.gap_s, 0.5);
    } else {
      t += cfg.gap_s;
    }
  }
  return events;
}

namespace {

using detail::JsonReader;

PadPosition read_position(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::Schema, fmt::format("{}: expected [x, y]", path));
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

PadGeometry read_geometry(JsonReader& r) {
  PadGeometry g;
  r.get_to("width", g.width);
  r.get_to("height", g.height);
  r.get_to("d0", g.d0);
  if (const auto* mics = r.raw("mics")) {
    if (!mics->is_array()) throw Error(ErrorCode::Schema, r.path() + ".mics: expected an array");
    g.mics.clear();
    for (std::size_t i = 0; i < mics->size(); ++i) {
      g.mics.push_back(read_position((*mics)[i], fmt::format("{}.mics[{}]", r.path(), i)));
    }
  }
  r.finish();
  return g;
}

MovementScript read_script(JsonReader& r, const PadGeometry& geom) {
  MovementScript s;
  if (auto v = r.opt<std::string>("speed")) {
    if (*v == "per_leg") {
      s.speed = SpeedProfile::PerLeg;
    } else if (*v == "constant") {
      s.speed = SpeedProfile::Constant;
    } else {
      throw Error(ErrorCode::Schema, fmt::format("{}.speed: unknown profile '{}'", r.path(), *v));
    }
  }
  if (auto band = r.opt<std::vector<double>>("band_hz")) {
    if (band->size() != 2) throw Error(ErrorCode::Schema, r.path() + ".band_hz: expected [low, high]");
    s.band_low_hz = (*band)[0];
    s.band_high_hz = (*band)[1];
  }
  r.get_to("amplitude", s.base_amplitude);
  const auto* wps = r.raw("waypoints");
  if (!wps || !wps->is_array()) {
    throw Error(ErrorCode::Schema, r.path() + ".waypoints: expected an array");
  }
  for (std::size_t i = 0; i < wps->size(); ++i) {
    JsonReader w((*wps)[i], fmt::format("{}.waypoints[{}]", r.path(), i));
    Waypoint wp;
    wp.time_s = w.req<double>("t");
    if (auto at = w.opt<std::string>("at")) {
      wp.point = features::pad_point_from_string(*at);
      wp.position = geom.locate(*wp.point);
    }
    if (const auto* pos = w.raw("pos")) {
      if (wp.point) throw Error(ErrorCode::Schema, w.path() + ": give either 'at' or 'pos'");
      wp.position = read_position(*pos, w.path() + ".pos");
    } else if (!wp.point) {
      throw Error(ErrorCode::Schema, w.path() + ": needs 'at' or 'pos'");
    }
    w.finish();
    s.waypoints.push_back(wp);
  }
  return s;
}

DirectionBenchmark read_benchmark(JsonReader& r) {
  DirectionBenchmark b;
  r.get_to("per_class", b.per_class);
  r.get_to("start_s", b.start_s);
  r.get_to("gap_s", b.gap_s);
  r.get_to("min_duration_s", b.min_duration_s);
  r.get_to("max_duration_s", b.max_duration_s);
  r.get_to("amplitude_jitter", b.amplitude_jitter);
  r.get_to("position_jitter", b.position_jitter);
  r.get_to("amplitude", b.base_amplitude);
  r.get_to("clap_brackets", b.clap_brackets);
  if (auto classes = r.opt<std::vector<std::string>>("classes")) {
    b.classes.clear();
    for (const auto& c : *classes) b.classes.push_back(features::DirectionLabel::parse(c));
  }
  return b;
}

}  // namespace

Scene scene_from_json(const nlohmann::json& j) {
  JsonReader r(j, "scene");
  Scene scene;
  r.get_to("sample_rate", scene.sample_rate);
  r.get_to("seed", scene.seed);
  scene.noise_floor_db = r.opt<double>("noise_floor_db");
  scene.duration_s = r.opt<double>("duration_s");
  if (auto g = r.child("geometry")) scene.geometry = read_geometry(*g);
  const auto* events = r.raw("events");
  if (events && !events->is_array()) {
    throw Error(ErrorCode::Schema, "scene.events: expected an array");
  }
  for (std::size_t i = 0; events && i < events->size(); ++i) {
    JsonReader e((*events)[i], fmt::format("scene.events[{}]", i));
    const auto type = e.req<std::string>("type");
    if (type == "movement") {
      MovementEvent m{read_script(e, scene.geometry), e.opt<std::string>("label")};
      scene.events.emplace_back(std::move(m));
    } else if (type == "click") {
      ClickSpec c;
      c.at_s = e.req<double>("at_s");
      e.get_to("gap_ms", c.gap_ms);
      e.get_to("press", c.press_amplitude);
      e.get_to("release", c.release_amplitude);
      e.get_to("decay_ms", c.decay_ms);
      c.label = e.opt<std::string>("label");
      scene.events.emplace_back(c);
    } else if (type == "clap") {
      ClapSpec c;
      c.at_s = e.req<double>("at_s");
      e.get_to("amplitude", c.amplitude);
      scene.events.emplace_back(c);
    } else if (type == "silence") {
      scene.events.emplace_back(SilenceSpec{e.req<double>("start_s"), e.req<double>("end_s")});
    } else if (type == "direction_benchmark") {
      const auto bench = read_benchmark(e);
      const auto seed = e.opt<std::uint64_t>("seed").value_or(derive_seed(scene.seed, 2000000 + i));
      for (auto& ev : direction_benchmark_events(bench, scene.geometry, seed)) {
        scene.events.push_back(std::move(ev));
      }
    } else {
      throw Error(ErrorCode::Schema, fmt::format("{}.type: unknown event type '{}'", e.path(), type));
    }
    e.finish();
  }
  r.finish();
  return scene;
}

}  // namespace mouseleak::synth
