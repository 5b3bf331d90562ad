#include "mouseleak/dataset.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <fstream>
#include <sstream>

#include "mouseleak/error.hpp"

namespace mouseleak {

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::Schema,
                fmt::format("dataset has {} feature rows but {} labels", features.rows(),
                            labels.size()));
  }
  if (!labels.empty() && features.cols() < 1) {
    throw Error(ErrorCode::Schema, "dataset has no feature columns");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= vocab.size()) {
      throw Error(ErrorCode::UnknownLabel,
                  fmt::format("row {}: label {} outside vocabulary of size {}", i,
                              labels[i], vocab.size()));
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.vocab = vocab;
  out.feature_names = feature_names;
  out.features = Matrix(0, features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.features.append_row(features.row(r));
    out.labels.push_back(labels[r]);
  }
  if (rows.empty()) out.features = Matrix(0, features.cols());
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(vocab.size(), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  auto out = fmt::output_file(path.string());
  for (std::size_t c = 0; c < ds.n_features(); ++c) out.print("f{},", c);
  out.print("label\n");
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    for (double v : ds.features.row(r)) out.print("{},", v);
    out.print("{}\n", ds.labels[r]);
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path, std::vector<std::string> vocab) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, fmt::format("{}: cannot open", path.string()));
  Dataset ds;
  ds.vocab = std::move(vocab);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::Schema, fmt::format("{}:{}: {}", path.string(), line_no, why));
  };
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> names;
      while (std::getline(ss, cell, ',')) names.push_back(cell);
      if (names.size() < 2 || names.back() != "label") throw fail("header must end in 'label'");
      names.pop_back();
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] != fmt::format("f{}", i)) throw fail(fmt::format("bad column '{}'", names[i]));
      }
      width = names.size();
      ds.features = Matrix(0, width);
      continue;
    }
    if (line.empty()) continue;
    row.clear();
    std::size_t pos = 0;
    int label = -1;
    for (std::size_t c = 0; c <= width; ++c) {
      auto comma = line.find(',', pos);
      if ((c < width) == (comma == std::string::npos)) {
        throw fail(fmt::format("expected {} columns", width + 1));
      }
      std::string cell = line.substr(pos, comma - pos);
      try {
        std::size_t used = 0;
        if (c < width) {
          row.push_back(std::stod(cell, &used));
        } else {
          label = std::stoi(cell, &used);
        }
        if (used != cell.size()) throw fail(fmt::format("bad number '{}'", cell));
      } catch (const std::logic_error&) {
        throw fail(fmt::format("bad number '{}'", cell));
      }
      pos = comma + 1;
    }
    ds.features.append_row(row);
    ds.labels.push_back(label);
  }
  if (line_no == 0) throw Error(ErrorCode::Schema, fmt::format("{}: empty file", path.string()));
  try {
    ds.validate();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
  return ds;
}

}  // namespace mouseleak
