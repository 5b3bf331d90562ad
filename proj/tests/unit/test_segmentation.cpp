#include <doctest.h>

#include <cmath>
#include <fstream>

#include "../support/oracles.hpp"
#include "mouseleak/dsp.hpp"
#include "mouseleak/error.hpp"
#include "mouseleak/segmentation.hpp"
#include "mouseleak/synth.hpp"

using namespace mouseleak;
using namespace mouseleak::segmentation;

namespace {

constexpr int kRate = 44100;

std::vector<double> floor_noise(std::size_t n, std::uint64_t seed) {
  return dsp::gaussian_noise(n, 1e-6, seed);  // -60 dBFS
}

void add_burst(std::vector<double>& x, double start_s, double len_s, double amp, std::uint64_t seed) {
  const auto b = oracle::uniform_samples(static_cast<std::size_t>(len_s * kRate), seed, amp);
  const auto off = static_cast<std::size_t>(start_s * kRate);
  for (std::size_t i = 0; i < b.size(); ++i) x[off + i] = b[i];
}

}  // namespace

TEST_CASE("abs_quantile interpolates linearly") {
  const std::vector<double> x{-4.0, 1.0, 3.0, -2.0};
  CHECK(abs_quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(abs_quantile(x, 0.0) == 1.0);
  CHECK(abs_quantile(x, 1.0) == 4.0);
  CHECK(abs_quantile(x, 0.9) == doctest::Approx(3.7));
}

TEST_CASE("detect_activity") {
  const auto silent = detect_activity(AudioClip::mono(std::vector<double>(44100, 0.0), kRate));
  CHECK(silent.segments.empty());
  CHECK(silent.degenerate);

  auto x = floor_noise(10 * kRate, 1);
  add_burst(x, 4.0, 0.5, 0.8, 2);
  const auto one = detect_activity(AudioClip::mono(x, kRate));
  CHECK_FALSE(one.degenerate);
  REQUIRE(one.segments.size() == 1);
  CHECK(std::abs(one.segments[0].start_s - 4.0) <= 0.02);
  CHECK(std::abs(one.segments[0].end_s - 4.5) <= 0.02);
  CHECK(one.segments[0].kind == SegmentKind::Movement);

  const auto scaled = detect_activity(scale(AudioClip::mono(x, kRate), 0.37));
  REQUIRE(scaled.segments.size() == 1);
  CHECK(scaled.segments[0].start_s == one.segments[0].start_s);
  CHECK(scaled.segments[0].end_s == one.segments[0].end_s);

  auto y = floor_noise(10 * kRate, 3);
  add_burst(y, 3.0, 0.2, 0.8, 4);
  add_burst(y, 3.23, 0.2, 0.8, 5);
  const auto merged = detect_activity(AudioClip::mono(y, kRate));
  REQUIRE(merged.segments.size() == 1);
  CHECK(std::abs(merged.segments[0].start_s - 3.0) <= 0.02);
  CHECK(std::abs(merged.segments[0].end_s - 3.43) <= 0.02);

  ActivityConfig strict;
  strict.merge_gap_ms = 10.0;
  CHECK(detect_activity(AudioClip::mono(y, kRate), strict).segments.size() == 2);

  strict.min_len_ms = 300.0;
  CHECK(detect_activity(AudioClip::mono(y, kRate), strict).segments.empty());

  const auto constant = detect_activity(AudioClip::mono(std::vector<double>(1000, 0.3), kRate));
  CHECK(constant.degenerate);
  CHECK(constant.segments.empty());

  ActivityConfig bad;
  bad.threshold_quantile = 1.0;
  CHECK_THROWS_AS(detect_activity(AudioClip::mono(x, kRate), bad), Error);
  CHECK_THROWS_AS(detect_activity(AudioClip::mono({}, kRate)), Error);
}

TEST_CASE("rms_envelope is centred") {
  std::vector<double> x(11, 0.0);
  x[5] = 1.0;
  const auto env = rms_envelope(x, 3);
  CHECK(env[5] == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(env[4] == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(env[2] == 0.0);
}

TEST_CASE("detect_claps") {
  CHECK(detect_claps(AudioClip::mono(floor_noise(kRate, 6), kRate)).empty());

  synth::Scene scene;
  scene.geometry.mics = {{13.0, 1.0}};
  scene.noise_floor_db = -60.0;
  scene.duration_s = 6.0;
  scene.events = {synth::ClapSpec{1.0, 0.9}, synth::ClapSpec{5.0, 0.9}};
  const auto claps = detect_claps(synth::synth_session(scene).clip);
  REQUIRE(claps.size() == 2);
  CHECK(std::abs(claps[0] - 1.0) <= 0.01);
  CHECK(std::abs(claps[1] - 5.0) <= 0.01);

  scene.events = {synth::ClapSpec{1.0, 0.9}, synth::ClapSpec{1.1, 0.9}};
  const auto close = detect_claps(synth::synth_session(scene).clip);
  REQUIRE(close.size() == 1);
  CHECK(std::abs(close[0] - 1.0) <= 0.01);
}

TEST_CASE("split_by_claps") {
  const auto clip = AudioClip::mono(std::vector<double>(11 * 100, 0.0), 100);
  const std::vector<double> pair{1.0, 10.0};
  const auto one = split_by_claps(clip, pair);
  REQUIRE(one.size() == 1);
  CHECK(one[0].start_s == doctest::Approx(1.1));
  CHECK(one[0].end_s == doctest::Approx(9.9));

  CHECK(split_by_claps(clip, std::vector<double>{}).empty());

  const std::vector<double> four{1, 4, 6, 9};
  const auto two = split_by_claps(clip, four);
  REQUIRE(two.size() == 2);
  CHECK(two[0].start_s == doctest::Approx(1.1));
  CHECK(two[0].end_s == doctest::Approx(3.9));
  CHECK(two[1].start_s == doctest::Approx(6.1));
  CHECK(two[1].end_s == doctest::Approx(8.9));
  for (const auto& s : two) {
    for (double c : four) CHECK_FALSE((c >= s.start_s && c <= s.end_s));
  }

  const std::vector<double> odd{1.0, 2.0, 7.5};
  try {
    split_by_claps(clip, odd);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("7.5") != std::string::npos);
  }
  const std::vector<double> unsorted{2.0, 1.0};
  CHECK_THROWS_AS(split_by_claps(clip, unsorted), Error);
}

TEST_CASE("detect_peaks") {
  CHECK(detect_peaks(AudioClip::mono(std::vector<double>(kRate, 0.0), kRate)).empty());

  std::vector<double> x(kRate, 0.0);
  x[12345] = -0.7;
  const auto one = detect_peaks(AudioClip::mono(x, kRate));
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0].time_s * kRate - 12345.0) <= 1.0);
  CHECK(one[0].amplitude == doctest::Approx(0.7));

  std::vector<double> train(kRate, 0.0);
  std::vector<std::size_t> expected;
  for (std::size_t i = 441; i < train.size(); i += 882) {
    train[i] = 0.5;
    expected.push_back(i);
  }
  const auto peaks = detect_peaks(AudioClip::mono(train, kRate), {0.5, 5.0});
  REQUIRE(peaks.size() == expected.size());
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    CHECK(std::abs(peaks[k].time_s * kRate - expected[k]) <= 1.0);
  }

  // Non-maximum suppression: the larger of two close peaks wins.
  std::vector<double> close(kRate, 0.0);
  close[1000] = 0.4;
  close[1000 + 100] = 0.9;
  const auto nms = detect_peaks(AudioClip::mono(close, kRate));
  REQUIRE(nms.size() == 1);
  CHECK(nms[0].amplitude == doctest::Approx(0.9));
}

TEST_CASE("pair_clicks") {
  const std::vector<double> ok{0.0, 0.05};
  const auto one = pair_clicks(std::span<const double>(ok));
  REQUIRE(one.size() == 1);
  CHECK(one[0].press_s == 0.0);
  CHECK(one[0].gap_ms() == doctest::Approx(50.0));

  const std::vector<double> too_close{0.0, 0.005};
  CHECK(pair_clicks(std::span<const double>(too_close)).empty());
  const std::vector<double> too_far{0.0, 0.3};
  CHECK(pair_clicks(std::span<const double>(too_far)).empty());

  const std::vector<double> edges{0.0, 0.01, 1.0, 1.2};
  CHECK(pair_clicks(std::span<const double>(edges)).size() == 2);

  const std::vector<double> unsorted{0.2, 0.1};
  try {
    pair_clicks(std::span<const double>(unsorted));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsortedInput);
  }

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> step(0.001, 0.4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t{0.0};
    for (int i = 0; i < 30; ++i) t.push_back(t.back() + step(rng));
    const auto clicks = pair_clicks(std::span<const double>(t));
    REQUIRE(clicks.size() <= t.size() / 2);
    for (std::size_t k = 0; k < clicks.size(); ++k) {
      REQUIRE(clicks[k].gap_ms() >= 10.0 - 1e-9);
      REQUIRE(clicks[k].gap_ms() <= 200.0 + 1e-9);
      if (k > 0) REQUIRE(clicks[k].press_s >= clicks[k - 1].release_s);
    }
  }
}

TEST_CASE("extract_click_window") {
  const auto clip = oracle::random_clip(2 * kRate, kRate, 8, 0.1);
  const auto w = extract_click_window(clip, {1.0, 1.05, 0.0, 0.0});
  CHECK(w.n_samples() == static_cast<std::size_t>(std::lround(0.35 * kRate)));
  CHECK(w.samples()[0] == clip.samples()[static_cast<std::size_t>(0.85 * kRate)]);

  const auto left = extract_click_window(clip, {0.05, 0.1, 0.0, 0.0});
  CHECK(left.samples()[0] == clip.samples()[0]);
  CHECK(left.n_samples() == static_cast<std::size_t>(std::lround(0.25 * kRate)));

  CHECK_THROWS_AS(extract_click_window(clip, {1.99, 2.5, 0.0, 0.0}), Error);

  const auto click = synth::synth_click(0.4, 60.0, {0.9, 0.7}, 3.0, 5);
  const auto events = pair_clicks(detect_peaks(click));
  REQUIRE(events.size() == 1);
  const auto window = extract_click_window(click, events[0]);
  // The window is short, so its top 0.1% holds only the press transient.
  const auto again = pair_clicks(detect_peaks(window, {0.99, 5.0}));
  REQUIRE(again.size() == 1);
  CHECK(again[0].gap_ms() == doctest::Approx(60.0).epsilon(0.02));
}

TEST_CASE("segment TSV round trip and errors") {
  const std::vector<Segment> segs{{0.5, 1.25, SegmentKind::Movement, "TL→BR"},
                                  {2.0, 2.1, SegmentKind::Clap, std::nullopt},
                                  {3.0, 3.05, SegmentKind::Click, "closing"}};
  const auto text = format_segments_tsv(segs);
  CHECK(text.rfind("start_s\tend_s\tkind\tlabel\n0.500000\t1.250000\tmovement\tTL→BR\n", 0) == 0);
  CHECK(parse_segments_tsv(text) == segs);

  auto dir = oracle::temp_dir("seg");
  write_segments_tsv(segs, dir / "s.tsv");
  CHECK(read_segments_tsv(dir / "s.tsv") == segs);

  try {
    parse_segments_tsv("start_s\tend_s\tkind\tlabel\n1.0\t0.5\tmovement\t\n", "x.tsv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("x.tsv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_segments_tsv("start_s\tend_s\tkind\tlabel\n0\t1\twobble\t\n"), Error);
  CHECK_THROWS_AS(parse_segments_tsv("bad header\n"), Error);
}

TEST_CASE("plot CSV carries waveform rows and markers") {
  auto dir = oracle::temp_dir("seg");
  const auto clip = oracle::random_clip(1000, 1000, 3, 0.5);
  const std::vector<Segment> marks{{0.2, 0.4, SegmentKind::Click, "x"}};
  write_plot_csv(clip, marks, dir / "p.csv", 10);
  std::ifstream in(dir / "p.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "time_s,amplitude,marker");
  std::size_t wave = 0, marker = 0;
  while (std::getline(in, line)) {
    if (line.back() == ',') ++wave;
    else ++marker;
  }
  CHECK(wave == 100);
  CHECK(marker == 2);
}
