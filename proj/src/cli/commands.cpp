#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json_util.hpp"
#include "mouseleak/audio_io.hpp"
#include "mouseleak/cli.hpp"
#include "mouseleak/dataset.hpp"
#include "mouseleak/dsp.hpp"
#include "mouseleak/error.hpp"
#include "mouseleak/features.hpp"
#include "mouseleak/learn.hpp"
#include "mouseleak/segmentation.hpp"
#include "mouseleak/synth.hpp"

namespace mouseleak::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  const RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;

  template <typename... Args>
  void log(fmt::format_string<Args...> f, Args&&... args) const {
    if (cfg.verbose) err << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }

  fs::path output(const std::string& name) const {
    const fs::path p(name);
    return p.is_absolute() ? p : fs::path(cfg.out_dir) / p;
  }
};

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorCode::InvalidArgument, fmt::format("{} is required", flag));
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, fmt::format("{}: cannot open", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("{}: cannot write", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::Io, fmt::format("{}: write failed", path.string()));
}

AudioClip load_clip(const std::string& wav, const std::string& wav_right) {
  require(wav, "--wav");
  AudioClip clip = read_wav(wav);
  if (wav_right.empty()) return clip;
  AudioClip right = read_wav(wav_right);
  if (!clip.is_mono() || !right.is_mono()) {
    throw Error(ErrorCode::UnsupportedChannels, "--wav-right needs two mono files");
  }
  return merge_channels(clip, right);
}

// Dataset CSVs travel with a JSON sidecar holding the vocabulary and the
// featurizer, since the CSV stores integer labels only.
fs::path sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".meta.json"); }

struct DatasetMeta {
  std::vector<std::string> vocab;
  features::FeaturizerConfig featurizer;
  std::string kind;
  double pre_ms = 0.0;
  double post_ms = 0.0;
};

void write_dataset(const Dataset& ds, const DatasetMeta& meta, const fs::path& path) {
  write_dataset_csv(ds, path);
  json j{{"vocab", meta.vocab},
         {"featurizer", features::to_json(meta.featurizer)},
         {"kind", meta.kind},
         {"pre_ms", meta.pre_ms},
         {"post_ms", meta.post_ms}};
  write_text(sidecar_path(path), j.dump(2) + "\n");
}

std::pair<Dataset, DatasetMeta> read_dataset(const fs::path& path) {
  const fs::path meta_path = sidecar_path(path);
  const json doc = read_json_file(meta_path);
  detail::JsonReader r(doc, meta_path.string());
  DatasetMeta meta;
  meta.vocab = r.req<std::vector<std::string>>("vocab");
  const json* feat = r.raw("featurizer");
  if (!feat) throw Error(ErrorCode::Schema, meta_path.string() + ": featurizer missing");
  meta.featurizer = features::featurizer_from_json(*feat);
  meta.kind = r.req<std::string>("kind");
  meta.pre_ms = r.req<double>("pre_ms");
  meta.post_ms = r.req<double>("post_ms");
  r.finish();
  Dataset ds = read_dataset_csv(path, meta.vocab);
  return {std::move(ds), std::move(meta)};
}

segmentation::PairingConfig pairing(double lo, double hi) { return {lo, hi}; }

std::vector<segmentation::ClickEvent> find_clicks(const AudioClip& clip, double quantile,
                                                  double refractory_ms, double min_gap_ms,
                                                  double max_gap_ms) {
  const AudioClip mono = to_mono(clip);
  const auto peaks = segmentation::detect_peaks(mono, {quantile, refractory_ms});
  return segmentation::pair_clicks(peaks, pairing(min_gap_ms, max_gap_ms));
}

int cmd_simulate(const Context& ctx) {
  const auto& o = ctx.cfg.simulate;
  require(o.scene, "--scene");
  synth::Scene scene;
  try {
    json script = read_json_file(o.scene);
    // A script without its own seed takes the run seed.
    if (script.is_object() && !script.contains("seed")) script["seed"] = ctx.cfg.seed;
    scene = synth::scene_from_json(script);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", o.scene, e.what()));
  }
  const auto session = synth::synth_session(scene);
  const fs::path wav = ctx.output(o.wav);
  const fs::path labels = ctx.output(o.labels);
  write_wav(session.clip, wav, o.bit_depth);
  segmentation::write_segments_tsv(session.labels, labels);

  std::map<std::string, std::size_t> counts;
  for (const auto& s : session.labels) ++counts[segmentation::to_string(s.kind)];
  std::string summary;
  for (const auto& [kind, n] : counts) summary += fmt::format(" {}={}", kind, n);
  ctx.out << fmt::format("simulate: {:.3f} s, {} ch @ {} Hz, {} events{} -> {}, {}\n",
                         session.clip.duration_s(), session.clip.n_channels(),
                         session.clip.sample_rate(), session.labels.size(), summary,
                         wav.string(), labels.string());
  return 0;
}

// Segments that overlap no labeled movement keep no label.
void transfer_labels(std::vector<segmentation::Segment>& segments,
                     const std::vector<segmentation::Segment>& reference) {
  for (auto& seg : segments) {
    double best = 0.0;
    for (const auto& ref : reference) {
      if (ref.kind != segmentation::SegmentKind::Movement || !ref.label) continue;
      const double overlap = std::min(seg.end_s, ref.end_s) - std::max(seg.start_s, ref.start_s);
      if (overlap > best) {
        best = overlap;
        seg.label = ref.label;
      }
    }
  }
}

int cmd_segment(const Context& ctx) {
  const auto& o = ctx.cfg.segment;
  const AudioClip clip = load_clip(o.wav, o.wav_right);
  const AudioClip mono = to_mono(clip);
  std::vector<segmentation::Segment> segments;
  if (o.claps) {
    const auto claps = segmentation::detect_claps(mono, {o.clap_quantile, o.clap_min_separation_ms});
    ctx.log("segment: {} claps detected", claps.size());
    segments = segmentation::split_by_claps(mono, claps, o.clap_guard_s);
  } else {
    const auto result =
        segmentation::detect_activity(mono, {o.quantile, o.min_len_ms, o.merge_gap_ms});
    ctx.log("segment: threshold {:.6g}{}", result.threshold,
            result.degenerate ? " (degenerate, no activity)" : "");
    segments = result.segments;
  }
  if (!o.label_from.empty()) transfer_labels(segments, segmentation::read_segments_tsv(o.label_from));
  const fs::path tsv = ctx.output(o.output);
  segmentation::write_segments_tsv(segments, tsv);
  if (!o.plot.empty()) segmentation::write_plot_csv(mono, segments, ctx.output(o.plot), o.plot_decimate);
  ctx.out << fmt::format("segment: {} segments -> {}\n", segments.size(), tsv.string());
  return 0;
}

int cmd_clicks(const Context& ctx) {
  const auto& o = ctx.cfg.clicks;
  const AudioClip clip = load_clip(o.wav, o.wav_right);
  const auto clicks = find_clicks(clip, o.quantile, o.refractory_ms, o.min_gap_ms, o.max_gap_ms);
  std::string text = "press_s\trelease_s\tgap_ms\tpress_amplitude\trelease_amplitude\n";
  for (const auto& c : clicks) {
    text += fmt::format("{:.6f}\t{:.6f}\t{:.3f}\t{:.6f}\t{:.6f}\n", c.press_s, c.release_s,
                        c.gap_ms(), c.press_amplitude, c.release_amplitude);
  }
  const fs::path tsv = ctx.output(o.output);
  write_text(tsv, text);
  ctx.out << fmt::format("clicks: {} clicks -> {}\n", clicks.size(), tsv.string());
  return 0;
}

features::FeaturizerConfig featurizer_of(const FeaturesOptions& o) {
  features::FeaturizerConfig f;
  f.kind = features::feature_kind_from_string(o.feature);
  f.n_windows = o.n_windows;
  f.mode = dsp::amplitude_mode_from_string(o.mode);
  f.mfcc.window_ms = o.mfcc_window_ms;
  f.mfcc.hop_ms = o.mfcc_hop_ms;
  f.mfcc.n_mfcc = o.n_mfcc;
  f.mfcc.n_filters = o.n_filters;
  f.normalize_mfcc = o.normalize_mfcc;
  return f;
}

int cmd_features(const Context& ctx) {
  const auto& o = ctx.cfg.features;
  require(o.labels, "--labels");
  const AudioClip clip = load_clip(o.wav, o.wav_right);
  const auto segments = segmentation::read_segments_tsv(o.labels);
  const bool clicks = o.kind == "click";
  const auto wanted = clicks ? segmentation::SegmentKind::Click : segmentation::SegmentKind::Movement;

  std::vector<features::LabeledClip> items;
  std::size_t skipped = 0;
  for (const auto& s : segments) {
    if (s.kind != wanted) continue;
    if (!s.label || s.label->empty()) {
      ++skipped;
      continue;
    }
    AudioClip piece = clicks ? segmentation::extract_click_window(
                                   clip, {s.start_s, s.end_s, 0.0, 0.0}, o.pre_ms, o.post_ms)
                             : slice(clip, s.start_s, s.end_s);
    items.push_back({std::move(piece), *s.label});
  }
  if (items.empty()) {
    throw Error(ErrorCode::EmptyInput,
                fmt::format("{}: no labeled {} segments", o.labels, o.kind));
  }
  ctx.log("features: {} labeled segments, {} unlabeled skipped", items.size(), skipped);
  auto built = features::build_dataset(items, featurizer_of(o));
  const fs::path csv = ctx.output(o.output);
  write_dataset(built.dataset, {built.dataset.vocab, built.featurizer, o.kind, o.pre_ms, o.post_ms},
                csv);
  ctx.out << fmt::format("features: {} rows x {} features, {} classes -> {}\n",
                         built.dataset.n_samples(), built.dataset.n_features(),
                         built.dataset.n_classes(), csv.string());
  return 0;
}

int cmd_train(const Context& ctx) {
  const auto& o = ctx.cfg.train;
  auto [ds, meta] = read_dataset(o.dataset);
  auto [train, test] = learn::train_test_split(ds, o.test_fraction, ctx.cfg.seed, o.stratified);
  write_dataset(train, meta, ctx.output("train.csv"));
  write_dataset(test, meta, ctx.output("test.csv"));

  learn::ForestParams params;
  params.n_trees = o.n_trees;
  params.seed = ctx.cfg.seed;
  params.max_depth = o.max_depth;
  params.min_leaf = o.min_leaf;
  params.features_per_split = o.features_per_split;
  params.bootstrap = o.bootstrap;
  params.n_threads = o.threads;
  auto model = learn::rf_train(train, params);
  model.set_featurizer(meta.featurizer);
  const fs::path model_path = ctx.output(o.model);
  model.save(model_path);

  const auto predicted = learn::rf_predict_all(model, test.features);
  ctx.out << fmt::format("train: {} train / {} test rows, {} trees, test accuracy {:.4f} -> {}\n",
                         train.n_samples(), test.n_samples(), params.n_trees,
                         learn::accuracy(test.labels, predicted), model_path.string());
  return 0;
}

int cmd_eval(const Context& ctx) {
  const auto& o = ctx.cfg.eval;
  const auto model = learn::RandomForestModel::load(o.model);
  auto [ds, meta] = read_dataset(o.dataset);
  if (ds.vocab != model.vocab()) {
    throw Error(ErrorCode::Schema,
                fmt::format("{}: class vocabulary differs from model {}", o.dataset, o.model));
  }
  if (ds.n_features() != model.n_features()) {
    throw Error(ErrorCode::WidthMismatch,
                fmt::format("{}: {} features, model {} expects {}", o.dataset, ds.n_features(),
                            o.model, model.n_features()));
  }
  const auto predicted = learn::rf_predict_all(model, ds.features);
  const auto report = learn::classification_report(ds.labels, predicted, ds.vocab);
  json j = report.to_json();
  j["confusion_matrix"] = learn::confusion_matrix(ds.labels, predicted, ds.vocab);
  const fs::path path = ctx.output(o.report);
  write_text(path, j.dump(2) + "\n");
  ctx.out << report.to_text(o.digits);
  ctx.log("eval: report -> {}", path.string());
  return 0;
}

int cmd_infer(const Context& ctx) {
  const auto& o = ctx.cfg.infer;
  const auto model = learn::RandomForestModel::load(o.model);
  if (!model.featurizer()) {
    throw Error(ErrorCode::Schema, fmt::format("{}: model carries no featurizer", o.model));
  }
  const AudioClip clip = load_clip(o.wav, o.wav_right);
  const auto clicks = find_clicks(clip, o.quantile, o.refractory_ms, o.min_gap_ms, o.max_gap_ms);
  std::string text = "press_s\trelease_s\tgap_ms\tlabel\tprobability\n";
  for (const auto& c : clicks) {
    const auto window = segmentation::extract_click_window(clip, c, o.pre_ms, o.post_ms);
    const auto x = features::featurize(window, *model.featurizer());
    if (x.size() != model.n_features()) {
      throw Error(ErrorCode::WidthMismatch,
                  fmt::format("click at {:.6f} s: {} features, model {} expects {}", c.press_s,
                              x.size(), o.model, model.n_features()));
    }
    const auto p = learn::rf_predict(model, x);
    text += fmt::format("{:.6f}\t{:.6f}\t{:.3f}\t{}\t{:.4f}\n", c.press_s, c.release_s, c.gap_ms(),
                        model.vocab()[p.label], p.probabilities[p.label]);
  }
  const fs::path tsv = ctx.output(o.output);
  write_text(tsv, text);
  ctx.out << text;
  ctx.log("infer: {} clicks -> {}", clicks.size(), tsv.string());
  return 0;
}

int cmd_report_plot(const Context& ctx) {
  const auto& o = ctx.cfg.report_plot;
  const AudioClip clip = load_clip(o.wav, o.wav_right);
  const fs::path path = ctx.output(o.output);
  if (o.kind == "trend") {
    features::write_trend_csv(clip, o.n_windows, dsp::amplitude_mode_from_string(o.mode), path);
  } else {
    std::vector<segmentation::Segment> markers;
    if (!o.segments.empty()) markers = segmentation::read_segments_tsv(o.segments);
    segmentation::write_plot_csv(to_mono(clip), markers, path, o.decimate);
  }
  ctx.out << fmt::format("report-plot: {} -> {}\n", o.kind, path.string());
  return 0;
}

// Pre-scan for --config so that file values become the defaults that
// command-line flags then override.
std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void add_wav_flags(CLI::App* sub, std::string& wav, std::string& wav_right) {
  sub->add_option("--wav", wav, "Input WAV (mono or stereo)");
  sub->add_option("--wav-right", wav_right, "Second mono WAV, merged as channel 1");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    if (auto path = find_config_path(args)) cfg = load_config(*path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"Acoustic side-channel analysis of mouse audio", "mouseleak"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  std::string config_path;
  bool dump = false;
  app.add_option("--seed", cfg.seed, "Seed for every randomized step");
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out-dir", cfg.out_dir, "Directory for relative output paths");
  app.add_flag("--verbose,-v", cfg.verbose, "Log progress to stderr");
  app.add_flag("--dump-config", dump, "Print the effective configuration as JSON");

  auto* simulate = app.add_subcommand("simulate", "Render a scene script to WAV + label TSV");
  simulate->add_option("--scene", cfg.simulate.scene, "Scene script (JSON)");
  simulate->add_option("--wav", cfg.simulate.wav, "Output WAV");
  simulate->add_option("--labels", cfg.simulate.labels, "Output label TSV");
  simulate->add_option("--bit-depth", cfg.simulate.bit_depth, "16 or 32");

  auto* segment = app.add_subcommand("segment", "Find movement segments");
  add_wav_flags(segment, cfg.segment.wav, cfg.segment.wav_right);
  segment->add_option("--quantile", cfg.segment.quantile, "|x| quantile used as threshold");
  segment->add_option("--min-len", cfg.segment.min_len_ms, "Minimum segment length (ms)");
  segment->add_option("--merge-gap", cfg.segment.merge_gap_ms, "Merge gap (ms)");
  segment->add_flag("--claps", cfg.segment.claps, "Split on clap pairs instead");
  segment->add_option("--clap-quantile", cfg.segment.clap_quantile);
  segment->add_option("--clap-guard", cfg.segment.clap_guard_s, "Trim after/before claps (s)");
  segment->add_option("--output,-o", cfg.segment.output);
  segment->add_option("--label-from", cfg.segment.label_from,
                      "Copy labels from the most-overlapping movement in this TSV");
  segment->add_option("--plot", cfg.segment.plot, "Waveform+markers CSV");
  segment->add_option("--plot-decimate", cfg.segment.plot_decimate);

  auto* clicks = app.add_subcommand("clicks", "Detect press/release click pairs");
  add_wav_flags(clicks, cfg.clicks.wav, cfg.clicks.wav_right);
  clicks->add_option("--quantile", cfg.clicks.quantile);
  clicks->add_option("--refractory-ms", cfg.clicks.refractory_ms);
  clicks->add_option("--min-gap-ms", cfg.clicks.min_gap_ms);
  clicks->add_option("--max-gap-ms", cfg.clicks.max_gap_ms);
  clicks->add_option("--output,-o", cfg.clicks.output);

  auto* feats = app.add_subcommand("features", "Build a labeled dataset CSV");
  add_wav_flags(feats, cfg.features.wav, cfg.features.wav_right);
  feats->add_option("--labels", cfg.features.labels, "Label track TSV");
  feats->add_option("--kind", cfg.features.kind, "movement | click");
  feats->add_option("--feature", cfg.features.feature, "mfcc | amplitude | diffline");
  feats->add_option("--n-windows", cfg.features.n_windows);
  feats->add_option("--mode", cfg.features.mode, "rms | mean_abs");
  feats->add_option("--mfcc-window-ms", cfg.features.mfcc_window_ms);
  feats->add_option("--mfcc-hop-ms", cfg.features.mfcc_hop_ms);
  feats->add_option("--n-mfcc", cfg.features.n_mfcc);
  feats->add_option("--n-filters", cfg.features.n_filters);
  feats->add_flag("--normalize-mfcc", cfg.features.normalize_mfcc);
  feats->add_option("--pre-ms", cfg.features.pre_ms, "Context before a click (ms)");
  feats->add_option("--post-ms", cfg.features.post_ms, "Context after a click (ms)");
  feats->add_option("--output,-o", cfg.features.output);

  auto* train = app.add_subcommand("train", "Split a dataset and train a random forest");
  train->add_option("--dataset", cfg.train.dataset);
  train->add_option("--test-fraction", cfg.train.test_fraction);
  train->add_option("--stratified", cfg.train.stratified);
  train->add_option("--n-trees", cfg.train.n_trees);
  train->add_option("--max-depth", cfg.train.max_depth, "0 = unlimited");
  train->add_option("--min-leaf", cfg.train.min_leaf);
  train->add_option("--features-per-split", cfg.train.features_per_split, "0 = sqrt");
  train->add_option("--bootstrap", cfg.train.bootstrap);
  train->add_option("--threads", cfg.train.threads);
  train->add_option("--model", cfg.train.model, "Output model JSON");

  auto* eval = app.add_subcommand("eval", "Print the classification report of a model");
  eval->add_option("--model", cfg.eval.model);
  eval->add_option("--dataset", cfg.eval.dataset);
  eval->add_option("--report", cfg.eval.report, "Output report JSON");
  eval->add_option("--digits", cfg.eval.digits);

  auto* infer = app.add_subcommand("infer", "Classify every detected click");
  infer->add_option("--model", cfg.infer.model);
  add_wav_flags(infer, cfg.infer.wav, cfg.infer.wav_right);
  infer->add_option("--quantile", cfg.infer.quantile);
  infer->add_option("--refractory-ms", cfg.infer.refractory_ms);
  infer->add_option("--min-gap-ms", cfg.infer.min_gap_ms);
  infer->add_option("--max-gap-ms", cfg.infer.max_gap_ms);
  infer->add_option("--pre-ms", cfg.infer.pre_ms);
  infer->add_option("--post-ms", cfg.infer.post_ms);
  infer->add_option("--output,-o", cfg.infer.output);

  auto* plot = app.add_subcommand("report-plot", "Write plot data as CSV");
  add_wav_flags(plot, cfg.report_plot.wav, cfg.report_plot.wav_right);
  plot->add_option("--kind", cfg.report_plot.kind, "waveform | trend");
  plot->add_option("--segments", cfg.report_plot.segments, "Marker TSV");
  plot->add_option("--n-windows", cfg.report_plot.n_windows);
  plot->add_option("--mode", cfg.report_plot.mode);
  plot->add_option("--decimate", cfg.report_plot.decimate);
  plot->add_option("--output,-o", cfg.report_plot.output);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    cfg.validate();
    if (dump) {
      out << dump_config(cfg);
      return 0;
    }
    const Context ctx{cfg, out, err};
    if (app.get_subcommands().empty()) {
      err << app.help();
      return 2;
    }
    fs::create_directories(cfg.out_dir);
    const auto* sub = app.get_subcommands().front();
    if (sub == simulate) return cmd_simulate(ctx);
    if (sub == segment) return cmd_segment(ctx);
    if (sub == clicks) return cmd_clicks(ctx);
    if (sub == feats) return cmd_features(ctx);
    if (sub == train) return cmd_train(ctx);
    if (sub == eval) return cmd_eval(ctx);
    if (sub == infer) return cmd_infer(ctx);
    return cmd_report_plot(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mouseleak::cli
