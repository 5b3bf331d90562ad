#include "mouseleak/segmentation.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mouseleak/error.hpp"

namespace mouseleak::segmentation {

namespace {

void require_mono(const AudioClip& clip, const char* op) {
  if (!clip.is_mono()) {
    throw Error(ErrorCode::UnsupportedChannels,
                fmt::format("{} expects a mono clip, got {} channels", op,
                            clip.n_channels()));
  }
}

std::size_t ms_to_samples(double ms, int rate) {
  return static_cast<std::size_t>(std::max(0L, std::lround(ms * rate / 1000.0)));
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Movement: return "movement";
    case SegmentKind::Clap: return "clap";
    case SegmentKind::Click: return "click";
    case SegmentKind::Silence: return "silence";
  }
  return "movement";
}

SegmentKind segment_kind_from_string(std::string_view name) {
  if (name == "movement") return SegmentKind::Movement;
  if (name == "clap") return SegmentKind::Clap;
  if (name == "click") return SegmentKind::Click;
  if (name == "silence") return SegmentKind::Silence;
  throw Error(ErrorCode::Schema, fmt::format("unknown segment kind '{}'", name));
}

double abs_quantile(std::span<const double> samples, double q) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty signal");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("quantile {} outside [0, 1]", q));
  }
  std::vector<double> a(samples.size());
  std::transform(samples.begin(), samples.end(), a.begin(),
                 [](double v) { return std::abs(v); });
  const double pos = q * static_cast<double>(a.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(lo), a.end());
  const double lo_val = a[lo];
  if (frac == 0.0 || lo + 1 >= a.size()) return lo_val;
  const double hi_val =
      *std::min_element(a.begin() + static_cast<std::ptrdiff_t>(lo) + 1, a.end());
  return lo_val + frac * (hi_val - lo_val);
}

std::vector<double> rms_envelope(std::span<const double> x, std::size_t window) {
  window = std::max<std::size_t>(window, 1);
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  std::vector<double> env(x.size());
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size(), lo + window);
    const double energy = std::max(0.0, prefix[hi] - prefix[lo]);
    env[i] = std::sqrt(energy / static_cast<double>(hi - lo));
  }
  return env;
}

ActivityResult detect_activity(const AudioClip& clip, const ActivityConfig& cfg) {
  require_mono(clip, "detect_activity");
  if (clip.empty()) throw Error(ErrorCode::EmptyInput, "detect_activity: empty clip");
  if (!(cfg.threshold_quantile > 0.0 && cfg.threshold_quantile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("threshold_quantile must be in (0, 1), got {}",
                            cfg.threshold_quantile));
  }
  auto x = clip.samples();
  const int rate = clip.sample_rate();
  ActivityResult result;
  result.threshold = abs_quantile(x, cfg.threshold_quantile);
  if (result.threshold >= max_abs(x)) {
    result.degenerate = true;
    return result;
  }

  const auto env = rms_envelope(x, ms_to_samples(cfg.envelope_ms, rate));
  std::vector<Segment> runs;
  std::size_t i = 0;
  while (i < env.size()) {
    if (env[i] <= result.threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < env.size() && env[j] > result.threshold) ++j;
    runs.push_back({static_cast<double>(i) / rate, static_cast<double>(j) / rate,
                    SegmentKind::Movement, std::nullopt});
    i = j;
  }

  const double merge_gap_s = cfg.merge_gap_ms / 1000.0;
  std::vector<Segment> merged;
  for (const auto& run : runs) {
    if (!merged.empty() && run.start_s - merged.back().end_s < merge_gap_s) {
      merged.back().end_s = run.end_s;
    } else {
      merged.push_back(run);
    }
  }
  const double min_len_s = cfg.min_len_ms / 1000.0;
  for (auto& seg : merged) {
    if (seg.duration_s() >= min_len_s) result.segments.push_back(std::move(seg));
  }
  return result;
}

std::vector<double> detect_claps(const AudioClip& clip, const ClapConfig& cfg) {
  require_mono(clip, "detect_claps");
  if (clip.empty()) throw Error(ErrorCode::EmptyInput, "detect_claps: empty clip");
  auto x = clip.samples();
  const double threshold =
      std::max(abs_quantile(x, cfg.quantile), cfg.min_crest * abs_quantile(x, 0.5));
  if (threshold >= max_abs(x)) return {};
  const std::size_t separation = ms_to_samples(cfg.min_separation_ms, clip.sample_rate());
  std::vector<double> claps;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) <= threshold) continue;
    if (last && i - *last < separation) continue;
    claps.push_back(static_cast<double>(i) / clip.sample_rate());
    last = i;
  }
  return claps;
}

std::vector<Segment> split_by_claps(const AudioClip& clip, std::span<const double> claps,
                                    double guard_s) {
  if (!std::is_sorted(claps.begin(), claps.end())) {
    throw Error(ErrorCode::UnsortedInput, "split_by_claps: clap times not sorted");
  }
  if (claps.size() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("split_by_claps: odd clap count {}, unmatched clap at {:.6f} s",
                            claps.size(), claps.back()));
  }
  std::vector<Segment> out;
  for (std::size_t k = 0; k + 1 < claps.size(); k += 2) {
    const double start = claps[k] + guard_s;
    const double end = std::min(claps[k + 1] - guard_s, clip.duration_s());
    if (start < end) out.push_back({start, end, SegmentKind::Movement, std::nullopt});
  }
  return out;
}

std::vector<Peak> detect_peaks(const AudioClip& clip, const PeakConfig& cfg) {
  require_mono(clip, "detect_peaks");
  if (clip.empty()) throw Error(ErrorCode::EmptyInput, "detect_peaks: empty clip");
  auto x = clip.samples();
  const double threshold = abs_quantile(x, cfg.quantile);
  if (threshold >= max_abs(x)) return {};

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    if (a <= threshold) continue;
    const bool left_ok = i == 0 || a >= std::abs(x[i - 1]);
    const bool right_ok = i + 1 == x.size() || a > std::abs(x[i + 1]);
    if (left_ok && right_ok) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });

  const std::size_t refractory = ms_to_samples(cfg.refractory_ms, clip.sample_rate());
  std::set<std::size_t> kept;
  for (std::size_t idx : candidates) {
    auto next = kept.lower_bound(idx);
    if (next != kept.end() && *next - idx < refractory) continue;
    if (next != kept.begin() && idx - *std::prev(next) < refractory) continue;
    kept.insert(idx);
  }
  std::vector<Peak> peaks;
  peaks.reserve(kept.size());
  for (std::size_t idx : kept) {
    peaks.push_back({static_cast<double>(idx) / clip.sample_rate(), std::abs(x[idx])});
  }
  return peaks;
}

std::vector<ClickEvent> pair_clicks(std::span<const Peak> peaks, const PairingConfig& cfg) {
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i].time_s < peaks[i - 1].time_s) {
      throw Error(ErrorCode::UnsortedInput,
                  fmt::format("pair_clicks: peak {} at {:.6f} s precedes peak {} at {:.6f} s",
                              i, peaks[i].time_s, i - 1, peaks[i - 1].time_s));
    }
  }
  if (!(cfg.min_gap_ms >= 0.0 && cfg.min_gap_ms <= cfg.max_gap_ms)) {
    throw Error(ErrorCode::InvalidArgument, "pair_clicks: need 0 <= min_gap_ms <= max_gap_ms");
  }
  // Absorbs rounding in the seconds-to-milliseconds conversion.
  constexpr double kTolMs = 1e-9;
  std::vector<ClickEvent> clicks;
  std::size_t i = 0;
  while (i < peaks.size()) {
    std::optional<std::size_t> partner;
    for (std::size_t j = i + 1; j < peaks.size(); ++j) {
      const double gap = (peaks[j].time_s - peaks[i].time_s) * 1000.0;
      if (gap > cfg.max_gap_ms + kTolMs) break;
      if (gap >= cfg.min_gap_ms - kTolMs) {
        partner = j;
        break;
      }
    }
    if (!partner) {
      ++i;
      continue;
    }
    clicks.push_back({peaks[i].time_s, peaks[*partner].time_s, peaks[i].amplitude,
                      peaks[*partner].amplitude});
    i = *partner + 1;
  }
  return clicks;
}

std::vector<ClickEvent> pair_clicks(std::span<const double> peak_times,
                                    const PairingConfig& cfg) {
  std::vector<Peak> peaks;
  peaks.reserve(peak_times.size());
  for (double t : peak_times) peaks.push_back({t, 0.0});
  return pair_clicks(std::span<const Peak>(peaks), cfg);
}

AudioClip extract_click_window(const AudioClip& clip, const ClickEvent& click,
                               double pre_ms, double post_ms) {
  if (!(click.press_s >= 0.0 && click.press_s < click.release_s &&
        click.release_s <= clip.duration_s())) {
    throw Error(ErrorCode::IndexOutOfRange,
                fmt::format("click ({:.6f}, {:.6f}) s lies outside clip of {:.6f} s",
                            click.press_s, click.release_s, clip.duration_s()));
  }
  const double start = std::max(0.0, click.press_s - pre_ms / 1000.0);
  const double end = std::min(clip.duration_s(), click.release_s + post_ms / 1000.0);
  return slice(clip, start, end);
}

std::string format_segments_tsv(std::span<const Segment> segments) {
  std::string out = "start_s\tend_s\tkind\tlabel\n";
  for (const auto& s : segments) {
    out += fmt::format("{:.6f}\t{:.6f}\t{}\t{}\n", s.start_s, s.end_s, to_string(s.kind),
                       s.label.value_or(""));
  }
  return out;
}

void write_segments_tsv(std::span<const Segment> segments, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("{}: cannot open for writing", path.string()));
  out << format_segments_tsv(segments);
  if (!out) throw Error(ErrorCode::Io, fmt::format("{}: write failed", path.string()));
}

std::vector<Segment> parse_segments_tsv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Segment> out;
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::Schema, fmt::format("{}:{}: {}", source, line_no, why));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line.rfind("start_s\tend_s\tkind", 0) != 0) throw fail("bad header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() < 3 || cols.size() > 4) throw fail("expected 3 or 4 columns");
    Segment seg;
    try {
      std::size_t used = 0;
      seg.start_s = std::stod(cols[0], &used);
      if (used != cols[0].size()) throw fail("bad start_s");
      seg.end_s = std::stod(cols[1], &used);
      if (used != cols[1].size()) throw fail("bad end_s");
    } catch (const std::logic_error&) {
      throw fail("non-numeric timestamp");
    }
    if (!(seg.start_s >= 0.0 && seg.start_s < seg.end_s)) throw fail("need 0 <= start_s < end_s");
    try {
      seg.kind = segment_kind_from_string(cols[2]);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    if (cols.size() == 4 && !cols[3].empty()) seg.label = cols[3];
    out.push_back(std::move(seg));
  }
  if (line_no == 0) throw Error(ErrorCode::Schema, fmt::format("{}: empty file", source));
  return out;
}

std::vector<Segment> read_segments_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, fmt::format("{}: cannot open", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_segments_tsv(buf.str(), path.string());
}

std::vector<Segment> clicks_to_segments(std::span<const ClickEvent> clicks) {
  std::vector<Segment> out;
  out.reserve(clicks.size());
  for (const auto& c : clicks) {
    out.push_back({c.press_s, c.release_s, SegmentKind::Click, std::nullopt});
  }
  return out;
}

void write_plot_csv(const AudioClip& mono, std::span<const Segment> markers,
                    const std::filesystem::path& path, std::size_t decimate) {
  require_mono(mono, "write_plot_csv");
  decimate = std::max<std::size_t>(decimate, 1);
  auto out = fmt::output_file(path.string());
  out.print("time_s,amplitude,marker\n");
  auto x = mono.samples();
  const double rate = mono.sample_rate();
  for (std::size_t begin = 0; begin < x.size(); begin += decimate) {
    const std::size_t end = std::min(x.size(), begin + decimate);
    std::size_t best = begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (std::abs(x[i]) > std::abs(x[best])) best = i;
    }
    out.print("{:.6f},{},\n", static_cast<double>(best) / rate, x[best]);
  }
  for (const auto& m : markers) {
    std::string name = to_string(m.kind);
    if (m.label) name += ":" + *m.label;
    out.print("{:.6f},,{}_start\n", m.start_s, name);
    out.print("{:.6f},,{}_end\n", m.end_s, name);
  }
}

}  // namespace mouseleak::segmentation
