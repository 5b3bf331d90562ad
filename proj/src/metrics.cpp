#include <fmt/format.h>

#include <algorithm>

#include "mouseleak/error.hpp"
#include "mouseleak/learn.hpp"

namespace mouseleak::learn {

namespace {

void check_inputs(std::span<const int> y_true, std::span<const int> y_pred,
                  std::size_t n_classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::WidthMismatch,
                fmt::format("y_true has {} labels, y_pred has {}", y_true.size(), y_pred.size()));
  }
  auto bad = [n_classes](int l) { return l < 0 || static_cast<std::size_t>(l) >= n_classes; };
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (bad(y_true[i]) || bad(y_pred[i])) {
      throw Error(ErrorCode::UnknownLabel,
                  fmt::format("position {}: label outside vocabulary of size {}", i, n_classes));
    }
  }
}

ClassMetrics metrics_from_counts(std::string name, std::size_t tp, std::size_t fp,
                                 std::size_t fn) {
  ClassMetrics m;
  m.name = std::move(name);
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  m.support = tp + fn;
  return m;
}

}  // namespace

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw Error(ErrorCode::WidthMismatch, "accuracy: need equal, non-empty label sequences");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i];
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const std::string> vocab) {
  check_inputs(y_true, y_pred, vocab.size());
  ConfusionMatrix cm(vocab.size(), std::vector<std::size_t>(vocab.size(), 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++cm[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  }
  return cm;
}

ClassificationReport classification_report(std::span<const int> y_true,
                                           std::span<const int> y_pred,
                                           std::span<const std::string> vocab) {
  if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "classification_report: no labels");
  check_inputs(y_true, y_pred, vocab.size());
  ClassificationReport report;
  report.total = y_true.size();
  std::size_t hits = 0;
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    const int cls = static_cast<int>(c);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      const bool t = y_true[i] == cls;
      const bool p = y_pred[i] == cls;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    hits += tp;
    report.classes.push_back(metrics_from_counts(vocab[c], tp, fp, fn));
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(report.total);
  return report;
}

ClassificationReport report_from_confusion(const ConfusionMatrix& cm,
                                           std::span<const std::string> vocab) {
  if (cm.size() != vocab.size()) {
    throw Error(ErrorCode::WidthMismatch, "confusion matrix and vocabulary sizes differ");
  }
  ClassificationReport report;
  std::size_t trace = 0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    trace += cm[i][i];
    for (std::size_t j = 0; j < cm.size(); ++j) report.total += cm[i][j];
  }
  if (report.total == 0) throw Error(ErrorCode::EmptyInput, "empty confusion matrix");
  for (std::size_t c = 0; c < cm.size(); ++c) {
    std::size_t col = 0, row = 0;
    for (std::size_t k = 0; k < cm.size(); ++k) {
      col += cm[k][c];
      row += cm[c][k];
    }
    const std::size_t tp = cm[c][c];
    report.classes.push_back(metrics_from_counts(vocab[c], tp, col - tp, row - tp));
  }
  report.accuracy = static_cast<double>(trace) / static_cast<double>(report.total);
  return report;
}

std::string ClassificationReport::to_text(int digits) const {
  // Arrow glyphs are three bytes but one column wide.
  auto display_width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::size_t name_w = 8;  // "Accuracy"
  for (const auto& c : classes) name_w = std::max(name_w, display_width(c.name));
  auto pad = [&](const std::string& s) {
    return s + std::string(name_w - display_width(s), ' ');
  };

  std::string out = fmt::format("{}  {:>9}  {:>9}  {:>9}  {:>9}\n", pad("Class"), "Precision",
                                "Recall", "F1-Score", "Support");
  for (const auto& c : classes) {
    out += fmt::format("{}  {:>9.{}f}  {:>9.{}f}  {:>9.{}f}  {:>9}\n", pad(c.name), c.precision,
                       digits, c.recall, digits, c.f1, digits, c.support);
  }
  out += fmt::format("{}  {:>9}  {:>9}  {:>9.{}f}  {:>9}\n", pad("Accuracy"), "", "", accuracy,
                     digits, total);
  return out;
}

nlohmann::json ClassificationReport::to_json() const {
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classes) {
    cls.push_back({{"class", c.name},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"support", c.support}});
  }
  return {{"classes", cls}, {"accuracy", accuracy}, {"total", total}};
}

}  // namespace mouseleak::learn
