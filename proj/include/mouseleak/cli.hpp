#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mouseleak::cli {

struct SimulateOptions {
  std::string scene;
  std::string wav = "session.wav";
  std::string labels = "labels.tsv";
  int bit_depth = 16;
};

struct SegmentOptions {
  std::string wav;
  std::string wav_right;  ///< second mono file, zipped into stereo
  double quantile = 0.95;
  double min_len_ms = 100.0;
  double merge_gap_ms = 50.0;
  bool claps = false;
  double clap_quantile = 0.999;
  double clap_min_separation_ms = 300.0;
  double clap_guard_s = 0.1;
  std::string output = "segments.tsv";
  /// Labeled segment TSV; each found segment takes the label of the
  /// movement it overlaps most. Empty leaves segments unlabeled.
  std::string label_from;
  std::string plot;  ///< empty disables the plot CSV
  std::size_t plot_decimate = 1;
};

struct ClicksOptions {
  std::string wav;
  std::string wav_right;
  double quantile = 0.999;
  double refractory_ms = 5.0;
  double min_gap_ms = 10.0;
  double max_gap_ms = 200.0;
  std::string output = "clicks.tsv";
};

struct FeaturesOptions {
  std::string wav;
  std::string wav_right;
  std::string labels;
  std::string kind = "movement";  ///< movement | click
  std::string feature = "diffline";
  std::size_t n_windows = 50;
  std::string mode = "rms";
  double mfcc_window_ms = 36.0;
  double mfcc_hop_ms = 18.0;
  std::size_t n_mfcc = 13;
  std::size_t n_filters = 26;
  bool normalize_mfcc = false;
  double pre_ms = 200.0;
  double post_ms = 50.0;
  std::string output = "dataset.csv";
};

struct TrainOptions {
  std::string dataset = "dataset.csv";
  double test_fraction = 0.35;
  bool stratified = true;
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;
  bool bootstrap = true;
  std::size_t threads = 1;
  std::string model = "model.json";
};

struct EvalOptions {
  std::string model = "model.json";
  std::string dataset = "test.csv";
  std::string report = "report.json";
  int digits = 2;
};

struct InferOptions {
  std::string model = "model.json";
  std::string wav;
  std::string wav_right;
  double quantile = 0.999;
  double refractory_ms = 5.0;
  double min_gap_ms = 10.0;
  double max_gap_ms = 200.0;
  double pre_ms = 200.0;
  double post_ms = 50.0;
  std::string output = "predictions.tsv";
};

struct ReportPlotOptions {
  std::string wav;
  std::string wav_right;
  std::string kind = "waveform";  ///< waveform | trend
  std::string segments;
  std::size_t n_windows = 50;
  std::string mode = "rms";
  std::size_t decimate = 1;
  std::string output = "plot.csv";
};

/// Every parameter a run can take. Serializes to JSON with sorted keys;
/// loading rejects unknown keys and out-of-range values.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool verbose = false;
  SimulateOptions simulate;
  SegmentOptions segment;
  ClicksOptions clicks;
  FeaturesOptions features;
  TrainOptions train;
  EvalOptions eval;
  InferOptions infer;
  ReportPlotOptions report_plot;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& cfg);

/// Entry point. args excludes the program name. Returns the exit code:
/// 0 on success, 1 on a pipeline error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mouseleak::cli
