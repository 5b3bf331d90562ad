#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mouseleak/audio_io.hpp"
#include "mouseleak/cli.hpp"
#include "mouseleak/dsp.hpp"
#include "mouseleak/error.hpp"
#include "mouseleak/features.hpp"
#include "mouseleak/learn.hpp"
#include "mouseleak/segmentation.hpp"
#include "mouseleak/synth.hpp"

namespace py = pybind11;
using namespace mouseleak;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Accepts shape (n,) for mono or (channels, n).
AudioClip clip_from_array(const Array& samples, int sample_rate) {
  if (samples.ndim() == 1) {
    const double* p = samples.data();
    return AudioClip::mono(std::vector<double>(p, p + samples.shape(0)), sample_rate);
  }
  if (samples.ndim() != 2) throw py::value_error("samples must be 1-D or (channels, n)");
  std::vector<std::vector<double>> channels;
  for (py::ssize_t c = 0; c < samples.shape(0); ++c) {
    const double* p = samples.data(c, 0);
    channels.emplace_back(p, p + samples.shape(1));
  }
  return AudioClip(std::move(channels), sample_rate);
}

Array clip_to_array(const AudioClip& clip) {
  Array out({static_cast<py::ssize_t>(clip.n_channels()), static_cast<py::ssize_t>(clip.n_samples())});
  for (std::size_t c = 0; c < clip.n_channels(); ++c) {
    const auto s = clip.samples(c);
    std::copy(s.begin(), s.end(), out.mutable_data(c, 0));
  }
  return out;
}

Array matrix_to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) *out.mutable_data(r, c) = m(r, c);
  }
  return out;
}

Matrix array_to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("features must be 2-D");
  Matrix m(a.shape(0), a.shape(1));
  for (py::ssize_t r = 0; r < a.shape(0); ++r) {
    for (py::ssize_t c = 0; c < a.shape(1); ++c) m(r, c) = *a.data(r, c);
  }
  return m;
}

py::dict segment_dict(const segmentation::Segment& s) {
  py::dict d;
  d["start_s"] = s.start_s;
  d["end_s"] = s.end_s;
  d["kind"] = segmentation::to_string(s.kind);
  d["label"] = s.label ? py::object(py::str(*s.label)) : py::object(py::none());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Acoustic side-channel analysis of mouse movements and clicks";
  py::register_exception<Error>(m, "MouseleakError", PyExc_RuntimeError);

  m.def("read_wav", [](const std::filesystem::path& path) {
    const auto clip = read_wav(path);
    return py::make_tuple(clip_to_array(clip), clip.sample_rate());
  }, py::arg("path"), "Returns (samples of shape (channels, n), sample_rate).");

  m.def("write_wav", [](const std::filesystem::path& path, const Array& samples, int sample_rate,
                        int bit_depth) { write_wav(clip_from_array(samples, sample_rate), path, bit_depth); },
        py::arg("path"), py::arg("samples"), py::arg("sample_rate"), py::arg("bit_depth") = 16);

  m.def("mfcc", [](const Array& samples, int sample_rate, double window_ms, double hop_ms,
                   std::size_t n_mfcc, std::size_t n_filters) {
    dsp::MfccConfig cfg;
    cfg.window_ms = window_ms;
    cfg.hop_ms = hop_ms;
    cfg.n_mfcc = n_mfcc;
    cfg.n_filters = n_filters;
    return matrix_to_array(dsp::mfcc(to_mono(clip_from_array(samples, sample_rate)), cfg).coeffs);
  }, py::arg("samples"), py::arg("sample_rate"), py::arg("window_ms") = 36.0, py::arg("hop_ms") = 18.0,
     py::arg("n_mfcc") = 13, py::arg("n_filters") = 26);

  m.def("amplitude_profile", [](const Array& samples, std::size_t n_windows, const std::string& mode) {
    return dsp::amplitude_profile(clip_from_array(samples, 1), n_windows,
                                  dsp::amplitude_mode_from_string(mode)).values;
  }, py::arg("samples"), py::arg("n_windows") = 50, py::arg("mode") = "rms");

  m.def("difference_amplitude_line", [](const Array& stereo, std::size_t n_windows, const std::string& mode) {
    return features::difference_amplitude_line(clip_from_array(stereo, 1), n_windows,
                                               dsp::amplitude_mode_from_string(mode)).values;
  }, py::arg("stereo"), py::arg("n_windows") = 50, py::arg("mode") = "rms");

  m.def("fit_trend", [](const std::vector<double>& values) {
    const auto t = features::fit_trend(values);
    return py::make_tuple(t.slope, t.intercept);
  }, py::arg("values"), "OLS of values against their index; returns (slope, intercept).");

  m.def("bin_angle", [](double deg, int n_bins) { return std::string(features::to_string(features::bin_angle(deg, n_bins))); },
        py::arg("angle_deg"), py::arg("n_bins") = 4);
  m.def("angular_error", &features::angular_error, py::arg("a_deg"), py::arg("b_deg"));
  m.def("displacement_to_angle", &features::displacement_to_angle, py::arg("dx"), py::arg("dy"),
        py::arg("y_down") = true);

  m.def("detect_activity", [](const Array& samples, int sample_rate, double quantile, double min_len_ms,
                              double merge_gap_ms) {
    segmentation::ActivityConfig cfg;
    cfg.threshold_quantile = quantile;
    cfg.min_len_ms = min_len_ms;
    cfg.merge_gap_ms = merge_gap_ms;
    py::list out;
    for (const auto& s : segmentation::detect_activity(to_mono(clip_from_array(samples, sample_rate)), cfg).segments) {
      out.append(segment_dict(s));
    }
    return out;
  }, py::arg("samples"), py::arg("sample_rate"), py::arg("quantile") = 0.95, py::arg("min_len_ms") = 100.0,
     py::arg("merge_gap_ms") = 50.0);

  m.def("detect_clicks", [](const Array& samples, int sample_rate, double quantile, double refractory_ms,
                            double min_gap_ms, double max_gap_ms) {
    const auto peaks = segmentation::detect_peaks(to_mono(clip_from_array(samples, sample_rate)),
                                                  {quantile, refractory_ms});
    std::vector<std::pair<double, double>> out;
    for (const auto& c : segmentation::pair_clicks(peaks, {min_gap_ms, max_gap_ms})) {
      out.emplace_back(c.press_s, c.release_s);
    }
    return out;
  }, py::arg("samples"), py::arg("sample_rate"), py::arg("quantile") = 0.999, py::arg("refractory_ms") = 5.0,
     py::arg("min_gap_ms") = 10.0, py::arg("max_gap_ms") = 200.0,
     "Returns (press_s, release_s) pairs.");

  m.def("simulate", [](const std::string& scene_json) {
    const auto session = synth::synth_session(synth::scene_from_json(nlohmann::json::parse(scene_json)));
    py::list labels;
    for (const auto& s : session.labels) labels.append(segment_dict(s));
    return py::make_tuple(clip_to_array(session.clip), session.clip.sample_rate(), labels);
  }, py::arg("scene_json"), "Renders a scene script; returns (samples, sample_rate, labels).");

  py::class_<learn::RandomForestModel>(m, "RandomForest")
      .def_static("train", [](const Array& x, const std::vector<std::string>& y, std::size_t n_trees,
                              std::uint64_t seed, std::size_t max_depth, std::size_t threads) {
        Dataset ds;
        ds.features = array_to_matrix(x);
        std::map<std::string, int> index;
        for (const auto& label : y) {
          auto [it, added] = index.emplace(label, static_cast<int>(ds.vocab.size()));
          if (added) ds.vocab.push_back(label);
          ds.labels.push_back(it->second);
        }
        learn::ForestParams params;
        params.n_trees = n_trees;
        params.seed = seed;
        params.max_depth = max_depth;
        params.n_threads = threads;
        return learn::rf_train(ds, params);
      }, py::arg("features"), py::arg("labels"), py::arg("n_trees") = 100, py::arg("seed") = 0,
         py::arg("max_depth") = 0, py::arg("threads") = 1)
      .def("predict", [](const learn::RandomForestModel& model, const Array& x) {
        const auto idx = learn::rf_predict_all(model, array_to_matrix(x));
        std::vector<std::string> out;
        for (int i : idx) out.push_back(model.vocab()[i]);
        return out;
      }, py::arg("features"))
      .def("predict_proba", [](const learn::RandomForestModel& model, const std::vector<double>& x) {
        return learn::rf_predict(model, x).probabilities;
      }, py::arg("row"))
      .def_property_readonly("classes", &learn::RandomForestModel::vocab)
      .def_property_readonly("n_features", &learn::RandomForestModel::n_features)
      .def("to_json", [](const learn::RandomForestModel& model) { return model.to_json().dump(); })
      .def_static("from_json", [](const std::string& text) {
        return learn::RandomForestModel::from_json(nlohmann::json::parse(text));
      }, py::arg("text"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line tool in-process; returns (exit_code, stdout, stderr).");
}
