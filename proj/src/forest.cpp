#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "json_util.hpp"
#include "mouseleak/error.hpp"
#include "mouseleak/learn.hpp"

namespace mouseleak::learn {

namespace {

constexpr int kModelVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const ForestParams& params, std::size_t mtry,
              std::uint64_t seed)
      : ds_(ds), params_(params), mtry_(mtry), rng_(seed) {}

  DecisionTree build() {
    std::vector<std::size_t> rows;
    const std::size_t n = ds_.n_samples();
    if (params_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      rows.resize(n);
      for (auto& r : rows) r = pick(rng_);
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    }
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::vector<double> counts(const std::vector<std::size_t>& rows) const {
    std::vector<double> c(ds_.n_classes(), 0.0);
    for (auto r : rows) c[static_cast<std::size_t>(ds_.labels[r])] += 1.0;
    return c;
  }

  int make_leaf(std::vector<double> distribution) {
    DecisionTree::Node node;
    node.distribution = std::move(distribution);
    tree_.nodes.push_back(std::move(node));
    return static_cast<int>(tree_.nodes.size() - 1);
  }

  Split best_split(const std::vector<std::size_t>& rows, const std::vector<double>& parent) {
    const std::size_t n_features = ds_.n_features();
    std::vector<std::size_t> order(n_features);
    std::iota(order.begin(), order.end(), 0);

    Split best;
    std::vector<std::pair<double, int>> column(rows.size());
    std::vector<double> left(parent.size());
    std::size_t informative = 0;
    // Lazy Fisher-Yates: draw features until mtry non-constant ones are seen.
    for (std::size_t i = 0; i < n_features && informative < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_features - 1);
      std::swap(order[i], order[pick(rng_)]);
      const std::size_t f = order[i];

      for (std::size_t k = 0; k < rows.size(); ++k) {
        column[k] = {ds_.features(rows[k], f), ds_.labels[rows[k]]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++informative;

      std::fill(left.begin(), left.end(), 0.0);
      double left_sq = 0.0;
      double right_sq = 0.0;
      std::vector<double> right = parent;
      for (double c : right) right_sq += c * c;
      const std::size_t n = column.size();
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto cls = static_cast<std::size_t>(column[k].second);
        left_sq += 2.0 * left[cls] + 1.0;
        left[cls] += 1.0;
        right_sq -= 2.0 * right[cls] - 1.0;
        right[cls] -= 1.0;
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < params_.min_leaf || n_right < params_.min_leaf) continue;
        // Maximizing this is equivalent to minimizing weighted Gini impurity.
        const double score = left_sq / static_cast<double>(n_left) +
                             right_sq / static_cast<double>(n_right);
        if (score > best.score) {
          double mid = 0.5 * (column[k].first + column[k + 1].first);
          if (!(mid < column[k + 1].first)) mid = column[k].first;
          best = {static_cast<int>(f), mid, score};
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    auto dist = counts(rows);
    const auto nonzero = std::count_if(dist.begin(), dist.end(), [](double c) { return c > 0; });
    const bool depth_limited = params_.max_depth != 0 && depth >= params_.max_depth;
    if (nonzero <= 1 || depth_limited || rows.size() < 2 * params_.min_leaf) {
      return make_leaf(std::move(dist));
    }
    const Split split = best_split(rows, dist);
    if (split.feature < 0) return make_leaf(std::move(dist));

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (auto r : rows) {
      (ds_.features(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_rows
                                                                                   : right_rows)
          .push_back(r);
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({split.feature, split.threshold, -1, -1, {}});
    const int l = grow(left_rows, depth + 1);
    const int r = grow(right_rows, depth + 1);
    tree_.nodes[static_cast<std::size_t>(id)].left = l;
    tree_.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Dataset& ds_;
  const ForestParams& params_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  DecisionTree tree_;
};

}  // namespace

const DecisionTree::Node& DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes[i];
}

int DecisionTree::predict(std::span<const double> x) const {
  return static_cast<int>(argmax_lowest(leaf_for(x).distribution));
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[i].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return deepest;
}

RandomForestModel rf_train(const Dataset& ds, const ForestParams& params) {
  ds.validate();
  if (ds.n_samples() < 2) {
    throw Error(ErrorCode::EmptyInput,
                fmt::format("rf_train needs at least 2 samples, got {}", ds.n_samples()));
  }
  const auto counts = ds.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw Error(ErrorCode::InvalidArgument, "rf_train needs at least 2 distinct classes");
  }
  if (params.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be >= 1");
  if (params.min_leaf < 1) throw Error(ErrorCode::InvalidArgument, "min_leaf must be >= 1");

  std::size_t mtry = params.features_per_split;
  if (mtry == 0) {
    mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(ds.n_features()))));
  }
  mtry = std::clamp<std::size_t>(mtry, 1, ds.n_features());

  RandomForestModel model;
  model.vocab_ = ds.vocab;
  model.n_features_ = ds.n_features();
  model.params_ = params;
  model.trees_.resize(params.n_trees);

  auto build = [&](std::size_t t) {
    const std::uint64_t tree_seed = splitmix64(params.seed ^ splitmix64(t));
    model.trees_[t] = TreeBuilder(ds, params, mtry, tree_seed).build();
  };
  const std::size_t workers = std::clamp<std::size_t>(params.n_threads, 1, params.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < params.n_trees; t += workers) build(t);
      });
    }
  }
  return model;
}

Prediction rf_predict(const RandomForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features()) {
    throw Error(ErrorCode::WidthMismatch,
                fmt::format("feature vector has width {}, model expects {}", x.size(),
                            model.n_features()));
  }
  std::vector<double> votes(model.vocab().size(), 0.0);
  for (const auto& tree : model.trees()) votes[static_cast<std::size_t>(tree.predict(x))] += 1.0;
  Prediction p;
  p.label = static_cast<int>(argmax_lowest(votes));
  const double n = static_cast<double>(model.trees().size());
  p.probabilities.resize(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) p.probabilities[i] = votes[i] / n;
  return p;
}

std::vector<int> rf_predict_all(const RandomForestModel& model, const Matrix& x) {
  std::vector<int> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(rf_predict(model, x.row(r)).label);
  return out;
}

nlohmann::json RandomForestModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json feature = nlohmann::json::array();
    nlohmann::json threshold = nlohmann::json::array();
    nlohmann::json left = nlohmann::json::array();
    nlohmann::json right = nlohmann::json::array();
    nlohmann::json value = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.distribution);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  return {
      {"format", "mouseleak-random-forest"},
      {"version", kModelVersion},
      {"vocab", vocab_},
      {"n_features", n_features_},
      {"params",
       {{"n_trees", params_.n_trees},
        {"seed", params_.seed},
        {"max_depth", params_.max_depth},
        {"min_leaf", params_.min_leaf},
        {"features_per_split", params_.features_per_split},
        {"bootstrap", params_.bootstrap}}},
      {"featurizer", featurizer_ ? features::to_json(*featurizer_) : nlohmann::json(nullptr)},
      {"trees", trees},
  };
}

RandomForestModel RandomForestModel::from_json(const nlohmann::json& j) {
  detail::JsonReader r(j, "model");
  if (r.req<std::string>("format") != "mouseleak-random-forest") {
    throw Error(ErrorCode::Schema, "model.format: not a mouseleak random forest");
  }
  if (const int v = r.req<int>("version"); v != kModelVersion) {
    throw Error(ErrorCode::Schema, fmt::format("model.version: unsupported version {}", v));
  }
  RandomForestModel m;
  m.vocab_ = r.req<std::vector<std::string>>("vocab");
  m.n_features_ = r.req<std::size_t>("n_features");
  if (auto p = r.child("params")) {
    p->get_to("n_trees", m.params_.n_trees);
    p->get_to("seed", m.params_.seed);
    p->get_to("max_depth", m.params_.max_depth);
    p->get_to("min_leaf", m.params_.min_leaf);
    p->get_to("features_per_split", m.params_.features_per_split);
    p->get_to("bootstrap", m.params_.bootstrap);
    p->finish();
  }
  if (const auto* f = r.raw("featurizer"); f != nullptr && !f->is_null()) {
    m.featurizer_ = features::featurizer_from_json(*f);
  }
  const auto* trees = r.raw("trees");
  if (trees == nullptr || !trees->is_array() || trees->empty()) {
    throw Error(ErrorCode::Schema, "model.trees: expected a non-empty array");
  }
  for (std::size_t t = 0; t < trees->size(); ++t) {
    detail::JsonReader tr((*trees)[t], fmt::format("model.trees[{}]", t));
    auto feature = tr.req<std::vector<int>>("feature");
    auto threshold = tr.req<std::vector<double>>("threshold");
    auto left = tr.req<std::vector<int>>("left");
    auto right = tr.req<std::vector<int>>("right");
    auto value = tr.req<std::vector<std::vector<double>>>("value");
    tr.finish();
    const std::size_t n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
        value.size() != n) {
      throw Error(ErrorCode::Schema, fmt::format("{}: column lengths differ", tr.path()));
    }
    DecisionTree tree;
    for (std::size_t i = 0; i < n; ++i) {
      const bool leaf = feature[i] < 0;
      const auto in_range = [n](int c) { return c > 0 && static_cast<std::size_t>(c) < n; };
      if (leaf ? value[i].size() != m.vocab_.size()
               : (static_cast<std::size_t>(feature[i]) >= m.n_features_ || !in_range(left[i]) ||
                  !in_range(right[i]))) {
        throw Error(ErrorCode::Schema, fmt::format("{}: node {} is malformed", tr.path(), i));
      }
      tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], std::move(value[i])});
    }
    m.trees_.push_back(std::move(tree));
  }
  m.params_.n_trees = m.trees_.size();
  r.finish();
  return m;
}

void RandomForestModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("{}: cannot open for writing", path.string()));
  out << to_json().dump() << '\n';
  if (!out) throw Error(ErrorCode::Io, fmt::format("{}: write failed", path.string()));
}

RandomForestModel RandomForestModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, fmt::format("{}: cannot open", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Schema, fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace mouseleak::learn
