#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mouseleak/matrix.hpp"

namespace mouseleak {

/// Labeled feature table. Labels index into vocab.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> vocab;
  std::vector<std::string> feature_names;

  std::size_t n_samples() const noexcept { return labels.size(); }
  std::size_t n_features() const noexcept { return features.cols(); }
  std::size_t n_classes() const noexcept { return vocab.size(); }

  /// Throws Error(Schema) when the invariants do not hold.
  void validate() const;

  /// Rows at the given indices, in that order. Vocab is shared.
  Dataset subset(const std::vector<std::size_t>& rows) const;

  std::vector<std::size_t> class_counts() const;
};

/// Header "f0,...,fN-1,label"; label is the integer class index.
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path,
                         std::vector<std::string> vocab);

}  // namespace mouseleak
