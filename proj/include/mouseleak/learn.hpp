#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mouseleak/dataset.hpp"
#include "mouseleak/features.hpp"

namespace mouseleak::learn {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded train/test partition. The test set holds round(n * test_fraction)
/// rows; under stratification each class contributes floor or ceil of its
/// share, with leftovers going to the classes with the largest remainders.
SplitIndices split_indices(const Dataset& ds, double test_fraction, std::uint64_t seed,
                           bool stratified = true);

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction = 0.35,
                                             std::uint64_t seed = 0, bool stratified = true);

struct ForestParams {
  std::size_t n_trees = 100;
  std::uint64_t seed = 0;
  std::size_t max_depth = 0;         ///< 0 means unlimited
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  ///< 0 means ceil(sqrt(n_features))
  bool bootstrap = true;
  std::size_t n_threads = 1;
};

/// Axis-aligned binary tree. Internal nodes send x[feature] <= threshold left.
struct DecisionTree {
  struct Node {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  ///< class counts at a leaf
  };

  std::vector<Node> nodes;

  const Node& leaf_for(std::span<const double> x) const;
  /// Majority class at the leaf reached by x; ties go to the lower index.
  int predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

class RandomForestModel {
 public:
  RandomForestModel() = default;

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const ForestParams& params() const noexcept { return params_; }

  /// Featurizer that produced the training data, when known. Lets inference
  /// reproduce the exact feature layout.
  const std::optional<features::FeaturizerConfig>& featurizer() const noexcept {
    return featurizer_;
  }
  void set_featurizer(features::FeaturizerConfig cfg) { featurizer_ = std::move(cfg); }

  nlohmann::json to_json() const;
  static RandomForestModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RandomForestModel load(const std::filesystem::path& path);

  friend RandomForestModel rf_train(const Dataset& ds, const ForestParams& params);

 private:
  std::vector<DecisionTree> trees_;
  std::vector<std::string> vocab_;
  std::size_t n_features_ = 0;
  ForestParams params_;
  std::optional<features::FeaturizerConfig> featurizer_;
};

/// Bootstrap-aggregated CART forest with Gini splits over random feature
/// subsets. Per-tree seeds derive from params.seed, so results do not depend
/// on n_threads.
RandomForestModel rf_train(const Dataset& ds, const ForestParams& params = {});

/// Hard majority vote; probabilities are vote shares. Ties go to the lower
/// label index.
Prediction rf_predict(const RandomForestModel& model, std::span<const double> x);
std::vector<int> rf_predict_all(const RandomForestModel& model, const Matrix& x);

int knn_classify(const Dataset& train, std::span<const double> x, std::size_t k = 5);

/// Training rows paired with angular targets stored as unit vectors.
struct AngleSamples {
  Matrix features;
  std::vector<features::UnitVector> targets;

  static AngleSamples from_degrees(Matrix features, std::span<const double> angles_deg);
};

/// Decodes the sum of the k nearest neighbours' unit vectors.
double knn_regress_angle(const AngleSamples& train, std::span<const double> x, std::size_t k = 5);

/// Indices of the k nearest rows by Euclidean distance; equal distances keep
/// the lower row index first.
std::vector<std::size_t> nearest_neighbors(const Matrix& rows, std::span<const double> x,
                                           std::size_t k);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  std::size_t total = 0;

  /// Columns: Class, Precision, Recall, F1-Score, Support; then accuracy.
  std::string to_text(int digits = 2) const;
  nlohmann::json to_json() const;

  friend bool operator==(const ClassificationReport&, const ClassificationReport&) = default;
};

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const std::string> vocab);

ClassificationReport classification_report(std::span<const int> y_true,
                                           std::span<const int> y_pred,
                                           std::span<const std::string> vocab);

ClassificationReport report_from_confusion(const ConfusionMatrix& cm,
                                           std::span<const std::string> vocab);

double accuracy(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace mouseleak::learn
