#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "mouseleak/cli.hpp"
#include "mouseleak/error.hpp"

namespace mouseleak::cli {

namespace {

// Each visitor lists a section's fields once; serialization and parsing
// both go through it, so the two cannot drift apart.
template <typename F>
void fields(SimulateOptions& o, F&& f) {
  f("scene", o.scene);
  f("wav", o.wav);
  f("labels", o.labels);
  f("bit_depth", o.bit_depth);
}

template <typename F>
void fields(SegmentOptions& o, F&& f) {
  f("wav", o.wav);
  f("wav_right", o.wav_right);
  f("quantile", o.quantile);
  f("min_len_ms", o.min_len_ms);
  f("merge_gap_ms", o.merge_gap_ms);
  f("claps", o.claps);
  f("clap_quantile", o.clap_quantile);
  f("clap_min_separation_ms", o.clap_min_separation_ms);
  f("clap_guard_s", o.clap_guard_s);
  f("output", o.output);
  f("label_from", o.label_from);
  f("plot", o.plot);
  f("plot_decimate", o.plot_decimate);
}

template <typename F>
void fields(ClicksOptions& o, F&& f) {
  f("wav", o.wav);
  f("wav_right", o.wav_right);
  f("quantile", o.quantile);
  f("refractory_ms", o.refractory_ms);
  f("min_gap_ms", o.min_gap_ms);
  f("max_gap_ms", o.max_gap_ms);
  f("output", o.output);
}

template <typename F>
void fields(FeaturesOptions& o, F&& f) {
  f("wav", o.wav);
  f("wav_right", o.wav_right);
  f("labels", o.labels);
  f("kind", o.kind);
  f("feature", o.feature);
  f("n_windows", o.n_windows);
  f("mode", o.mode);
  f("mfcc_window_ms", o.mfcc_window_ms);
  f("mfcc_hop_ms", o.mfcc_hop_ms);
  f("n_mfcc", o.n_mfcc);
  f("n_filters", o.n_filters);
  f("normalize_mfcc", o.normalize_mfcc);
  f("pre_ms", o.pre_ms);
  f("post_ms", o.post_ms);
  f("output", o.output);
}

template <typename F>
void fields(TrainOptions& o, F&& f) {
  f("dataset", o.dataset);
  f("test_fraction", o.test_fraction);
  f("stratified", o.stratified);
  f("n_trees", o.n_trees);
  f("max_depth", o.max_depth);
  f("min_leaf", o.min_leaf);
  f("features_per_split", o.features_per_split);
  f("bootstrap", o.bootstrap);
  f("threads", o.threads);
  f("model", o.model);
}

template <typename F>
void fields(EvalOptions& o, F&& f) {
  f("model", o.model);
  f("dataset", o.dataset);
  f("report", o.report);
  f("digits", o.digits);
}

template <typename F>
void fields(InferOptions& o, F&& f) {
  f("model", o.model);
  f("wav", o.wav);
  f("wav_right", o.wav_right);
  f("quantile", o.quantile);
  f("refractory_ms", o.refractory_ms);
  f("min_gap_ms", o.min_gap_ms);
  f("max_gap_ms", o.max_gap_ms);
  f("pre_ms", o.pre_ms);
  f("post_ms", o.post_ms);
  f("output", o.output);
}

template <typename F>
void fields(ReportPlotOptions& o, F&& f) {
  f("wav", o.wav);
  f("wav_right", o.wav_right);
  f("kind", o.kind);
  f("segments", o.segments);
  f("n_windows", o.n_windows);
  f("mode", o.mode);
  f("decimate", o.decimate);
  f("output", o.output);
}

template <typename F>
void sections(RunConfig& c, F&& f) {
  f("simulate", c.simulate);
  f("segment", c.segment);
  f("clicks", c.clicks);
  f("features", c.features);
  f("train", c.train);
  f("eval", c.eval);
  f("infer", c.infer);
  f("report_plot", c.report_plot);
}

void check(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, fmt::format("config {}: {}", field, rule));
}

void check_quantile(double q, const std::string& field) {
  check(q > 0.0 && q < 1.0, field, "must lie in (0, 1)");
}

void check_gaps(double lo, double hi, const std::string& section) {
  check(lo > 0.0, section + ".min_gap_ms", "must be positive");
  check(hi > lo, section + ".max_gap_ms", "must exceed min_gap_ms");
}

}  // namespace

void RunConfig::validate() const {
  check(!out_dir.empty(), "out_dir", "must not be empty");
  check(simulate.bit_depth == 16 || simulate.bit_depth == 32, "simulate.bit_depth",
        "must be 16 or 32");

  check_quantile(segment.quantile, "segment.quantile");
  check(segment.min_len_ms >= 0.0, "segment.min_len_ms", "must be non-negative");
  check(segment.merge_gap_ms >= 0.0, "segment.merge_gap_ms", "must be non-negative");
  check_quantile(segment.clap_quantile, "segment.clap_quantile");
  check(segment.clap_min_separation_ms >= 0.0, "segment.clap_min_separation_ms",
        "must be non-negative");
  check(segment.clap_guard_s >= 0.0, "segment.clap_guard_s", "must be non-negative");
  check(segment.plot_decimate >= 1, "segment.plot_decimate", "must be at least 1");

  check_quantile(clicks.quantile, "clicks.quantile");
  check(clicks.refractory_ms >= 0.0, "clicks.refractory_ms", "must be non-negative");
  check_gaps(clicks.min_gap_ms, clicks.max_gap_ms, "clicks");

  check(features.kind == "movement" || features.kind == "click", "features.kind",
        "must be 'movement' or 'click'");
  check(features.feature == "mfcc" || features.feature == "amplitude" ||
            features.feature == "diffline",
        "features.feature", "must be 'mfcc', 'amplitude' or 'diffline'");
  check(features.n_windows >= 1, "features.n_windows", "must be at least 1");
  check(features.mode == "rms" || features.mode == "mean_abs", "features.mode",
        "must be 'rms' or 'mean_abs'");
  check(features.mfcc_window_ms > 0.0, "features.mfcc_window_ms", "must be positive");
  check(features.mfcc_hop_ms > 0.0 && features.mfcc_hop_ms <= features.mfcc_window_ms,
        "features.mfcc_hop_ms", "must lie in (0, mfcc_window_ms]");
  check(features.n_filters >= 1, "features.n_filters", "must be at least 1");
  check(features.n_mfcc >= 1 && features.n_mfcc <= features.n_filters, "features.n_mfcc",
        "must lie in [1, n_filters]");
  check(features.pre_ms >= 0.0, "features.pre_ms", "must be non-negative");
  check(features.post_ms >= 0.0, "features.post_ms", "must be non-negative");

  check(train.test_fraction > 0.0 && train.test_fraction < 1.0, "train.test_fraction",
        "must lie in (0, 1)");
  check(train.n_trees >= 1, "train.n_trees", "must be at least 1");
  check(train.min_leaf >= 1, "train.min_leaf", "must be at least 1");
  check(train.threads >= 1, "train.threads", "must be at least 1");

  check(eval.digits >= 0 && eval.digits <= 12, "eval.digits", "must lie in [0, 12]");

  check_quantile(infer.quantile, "infer.quantile");
  check(infer.refractory_ms >= 0.0, "infer.refractory_ms", "must be non-negative");
  check_gaps(infer.min_gap_ms, infer.max_gap_ms, "infer");
  check(infer.pre_ms >= 0.0, "infer.pre_ms", "must be non-negative");
  check(infer.post_ms >= 0.0, "infer.post_ms", "must be non-negative");

  check(report_plot.kind == "waveform" || report_plot.kind == "trend", "report_plot.kind",
        "must be 'waveform' or 'trend'");
  check(report_plot.n_windows >= 1, "report_plot.n_windows", "must be at least 1");
  check(report_plot.mode == "rms" || report_plot.mode == "mean_abs", "report_plot.mode",
        "must be 'rms' or 'mean_abs'");
  check(report_plot.decimate >= 1, "report_plot.decimate", "must be at least 1");
}

nlohmann::json to_json(const RunConfig& cfg) {
  RunConfig c = cfg;
  nlohmann::json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["verbose"] = c.verbose;
  sections(c, [&](const char* name, auto& section) {
    nlohmann::json s = nlohmann::json::object();
    fields(section, [&](const char* key, auto& value) { s[key] = value; });
    j[name] = std::move(s);
  });
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  detail::JsonReader r(j, "config");
  r.get_to("seed", c.seed);
  r.get_to("out_dir", c.out_dir);
  r.get_to("verbose", c.verbose);
  sections(c, [&](const char* name, auto& section) {
    if (auto sub = r.child(name)) {
      fields(section, [&](const char* key, auto& value) { sub->get_to(key, value); });
      sub->finish();
    }
  });
  r.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, fmt::format("{}: cannot open config", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Schema, fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string dump_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace mouseleak::cli
