#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "../support/oracles.hpp"
#include "mouseleak/error.hpp"
#include "mouseleak/learn.hpp"

using namespace mouseleak;
using namespace mouseleak::learn;
using mouseleak::features::angular_error;

namespace {

Dataset blobs(std::size_t per_class, std::size_t n_classes, std::size_t width, double spread,
              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  Dataset ds;
  for (std::size_t c = 0; c < n_classes; ++c) ds.vocab.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < per_class * n_classes; ++i) {
    const auto c = static_cast<int>(i % n_classes);
    std::vector<double> row(width);
    for (std::size_t f = 0; f < width; ++f) row[f] = (f == static_cast<std::size_t>(c) % width ? 1.0 : 0.0) + g(rng);
    ds.features.append_row(row);
    ds.labels.push_back(c);
  }
  return ds;
}

Dataset xor_layout(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.05);
  Dataset ds;
  ds.vocab = {"even", "odd"};
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
    ds.features.append_row(std::vector<double>{a + g(rng), b + g(rng)});
    ds.labels.push_back(a ^ b);
  }
  return ds;
}

}  // namespace

TEST_CASE("split: 65/35 and set arithmetic") {
  const auto ds = blobs(50, 2, 3, 0.1, 1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = split_indices(ds, 0.35, seed);
    REQUIRE(s.train.size() == 65);
    REQUIRE(s.test.size() == 35);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) REQUIRE(all.insert(i).second);
    REQUIRE(all.size() == 100);
    REQUIRE(*all.rbegin() == 99);
  }
  const auto a = split_indices(ds, 0.35, 7);
  const auto b = split_indices(ds, 0.35, 7);
  CHECK(a.test == b.test);
  CHECK(a.test != split_indices(ds, 0.35, 8).test);

  const auto [train, test] = train_test_split(ds, 0.35, 3);
  CHECK(train.n_samples() == 65);
  CHECK(test.vocab == ds.vocab);
  const auto counts = test.class_counts();
  CHECK(counts[0] + counts[1] == 35);
  CHECK(std::abs(static_cast<long>(counts[0]) - static_cast<long>(counts[1])) <= 1);
}

TEST_CASE("split: small classes") {
  const auto two = blobs(2, 3, 2, 0.1, 2);
  const auto s = split_indices(two, 0.5, 1);
  std::vector<int> per(3, 0);
  for (auto i : s.test) ++per[two.labels[i]];
  CHECK(per == std::vector<int>{1, 1, 1});

  Dataset lonely = blobs(3, 2, 2, 0.1, 3);
  lonely.features.append_row(std::vector<double>{0.0, 0.0});
  lonely.labels.push_back(2);
  lonely.vocab.push_back("solo");
  CHECK_THROWS_AS(split_indices(lonely, 0.35, 1), Error);
  CHECK_NOTHROW(split_indices(lonely, 0.35, 1, false));
  CHECK_THROWS_AS(split_indices(two, 0.0, 1), Error);
  CHECK_THROWS_AS(split_indices(two, 1.0, 1), Error);
}

TEST_CASE("random forest basics") {
  Dataset sep;
  sep.vocab = {"a", "b"};
  for (int i = 0; i < 40; ++i) {
    sep.features.append_row(std::vector<double>{i < 20 ? -1.0 - i : 1.0 + i, std::sin(i * 1.0)});
    sep.labels.push_back(i < 20 ? 0 : 1);
  }
  const auto model = rf_train(sep, {.n_trees = 25, .seed = 1});
  CHECK(accuracy(sep.labels, rf_predict_all(model, sep.features)) == 1.0);

  const auto p = rf_predict(model, std::vector<double>{-100.0, 0.0});
  CHECK(p.label == 0);
  CHECK(p.probabilities[0] == 1.0);
  CHECK(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(rf_predict(model, std::vector<double>{1.0}), Error);

  Dataset single = sep;
  std::fill(single.labels.begin(), single.labels.end(), 0);
  CHECK_THROWS_AS(rf_train(single), Error);
  CHECK_THROWS_AS(rf_train(Dataset{}), Error);
}

TEST_CASE("random forest: XOR generalises") {
  const auto train = xor_layout(200, 4);
  const auto test = xor_layout(200, 5);
  const auto model = rf_train(train, {.n_trees = 50, .seed = 2});
  CHECK(accuracy(test.labels, rf_predict_all(model, test.features)) >= 0.95);
}

TEST_CASE("random forest: determinism and threads") {
  const auto ds = blobs(30, 4, 6, 0.6, 9);
  const auto probe = blobs(10, 4, 6, 0.6, 10);
  const auto a = rf_train(ds, {.n_trees = 30, .seed = 5});
  const auto b = rf_train(ds, {.n_trees = 30, .seed = 5, .n_threads = 4});
  CHECK(a.to_json() == b.to_json());
  for (std::size_t r = 0; r < probe.n_samples(); ++r) {
    REQUIRE(rf_predict(a, probe.features.row(r)).probabilities ==
            rf_predict(b, probe.features.row(r)).probabilities);
  }
  CHECK(a.to_json() != rf_train(ds, {.n_trees = 30, .seed = 6}).to_json());

  // Unlimited depth fits any consistent dataset exactly.
  const auto full = rf_train(ds, {.n_trees = 1, .seed = 3, .bootstrap = false});
  CHECK(accuracy(ds.labels, rf_predict_all(full, ds.features)) == 1.0);

  for (std::size_t r = 0; r < probe.n_samples(); ++r) {
    const auto p = rf_predict(a, probe.features.row(r));
    for (double v : p.probabilities) REQUIRE(v >= 0.0);
    REQUIRE(std::abs(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("random forest: single tree equals its leaf majority") {
  Dataset ds;
  ds.vocab = {"lo", "hi"};
  const double xs[] = {0.1, 0.2, 0.3, 0.8, 0.9};
  const int ys[] = {0, 0, 1, 1, 1};
  for (int i = 0; i < 5; ++i) {
    ds.features.append_row(std::vector<double>{xs[i]});
    ds.labels.push_back(ys[i]);
  }
  const auto model = rf_train(ds, {.n_trees = 1, .seed = 0, .bootstrap = false});
  const auto& tree = model.trees().front();
  // Manual trace: the best Gini split separates {0.1, 0.2} from the rest at 0.25.
  REQUIRE(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.25));
  for (double x : {0.0, 0.15, 0.26, 0.5, 1.0}) {
    const std::vector<double> v{x};
    CHECK(rf_predict(model, v).label == tree.predict(v));
    CHECK(rf_predict(model, v).label == (x <= 0.25 ? 0 : 1));
  }
}

TEST_CASE("random forest: JSON round trip") {
  const auto ds = blobs(20, 3, 4, 0.5, 11);
  auto model = rf_train(ds, {.n_trees = 10, .seed = 8});
  features::FeaturizerConfig f;
  f.n_windows = 20;
  model.set_featurizer(f);
  auto dir = oracle::temp_dir("learn");
  model.save(dir / "m.json");
  const auto back = RandomForestModel::load(dir / "m.json");
  CHECK(back.to_json() == model.to_json());
  CHECK(back.featurizer() == model.featurizer());
  CHECK(back.vocab() == model.vocab());
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    REQUIRE(rf_predict(back, ds.features.row(r)).probabilities ==
            rf_predict(model, ds.features.row(r)).probabilities);
  }
  auto j = model.to_json();
  j["version"] = 99;
  CHECK_THROWS_AS(RandomForestModel::from_json(j), Error);
  j = model.to_json();
  j["extra"] = true;
  CHECK_THROWS_AS(RandomForestModel::from_json(j), Error);
}

TEST_CASE("knn") {
  const auto ds = blobs(5, 3, 3, 0.3, 12);
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    REQUIRE(knn_classify(ds, ds.features.row(r), 1) == ds.labels[r]);
  }
  CHECK_THROWS_AS(knn_classify(ds, ds.features.row(0), 100), Error);

  // Exhaustive distance-sort oracle on a crafted 6-point set.
  Matrix pts;
  const double coords[6][2] = {{0, 0}, {1, 0}, {0, 2}, {3, 3}, {-1, -1}, {0.5, 0.5}};
  for (const auto& c : coords) pts.append_row(std::vector<double>{c[0], c[1]});
  const std::vector<double> q{0.4, 0.1};
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < 6; ++i) {
    d.push_back({std::hypot(coords[i][0] - q[0], coords[i][1] - q[1]), i});
  }
  std::sort(d.begin(), d.end());
  const auto nn = nearest_neighbors(pts, q, 3);
  REQUIRE(nn.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(nn[k] == d[k].second);

  Matrix three(3, 1);
  three(0, 0) = 0.0;
  three(1, 0) = 0.1;
  three(2, 0) = -0.1;
  const std::vector<double> angles{10.0, 350.0, 0.0};
  const auto samples = AngleSamples::from_degrees(three, angles);
  CHECK(angular_error(knn_regress_angle(samples, std::vector<double>{0.0}, 3), 0.0) < 1e-9);

  const std::vector<double> opposite{90.0, 270.0};
  Matrix two(2, 1);
  two(1, 0) = 1.0;
  CHECK_THROWS_AS(knn_regress_angle(AngleSamples::from_degrees(two, opposite), std::vector<double>{0.5}, 2),
                  Error);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 360);
  Matrix feats(20, 2);
  std::vector<double> targets(20);
  for (std::size_t i = 0; i < 20; ++i) {
    feats(i, 0) = u(rng);
    feats(i, 1) = u(rng);
    targets[i] = u(rng);
  }
  const std::vector<double> x{100.0, 200.0};
  const double base = knn_regress_angle(AngleSamples::from_degrees(feats, targets), x, 5);
  for (double delta : {17.0, 123.0, 359.0}) {
    std::vector<double> rotated = targets;
    for (double& t : rotated) t += delta;
    const double r = knn_regress_angle(AngleSamples::from_degrees(feats, rotated), x, 5);
    CHECK(angular_error(r, base + delta) < 1e-9);
  }
}

TEST_CASE("classification report: hand-computed example") {
  const std::vector<std::string> vocab{"A", "B"};
  const std::vector<int> truth{0, 0, 1, 1};
  const std::vector<int> pred{0, 1, 1, 1};
  const auto r = classification_report(truth, pred, vocab);
  CHECK(r.classes[0].precision == 1.0);
  CHECK(r.classes[0].recall == 0.5);
  CHECK(r.classes[0].f1 == 2.0 / 3.0);
  CHECK(r.classes[1].precision == 2.0 / 3.0);
  CHECK(r.classes[1].recall == 1.0);
  CHECK(r.classes[1].f1 == 0.8);
  CHECK(r.accuracy == 0.75);
  CHECK(r.total == 4);
  CHECK(r.classes[0].support == 2);

  const auto cm = confusion_matrix(truth, pred, vocab);
  CHECK(cm == ConfusionMatrix{{1, 1}, {0, 2}});
  CHECK(report_from_confusion(cm, vocab) == r);

  const auto perfect = classification_report(truth, truth, vocab);
  for (const auto& c : perfect.classes) {
    CHECK(c.precision == 1.0);
    CHECK(c.recall == 1.0);
    CHECK(c.f1 == 1.0);
  }
  CHECK(confusion_matrix(truth, truth, vocab) == ConfusionMatrix{{2, 0}, {0, 2}});

  const std::vector<int> all_b{1, 1, 1, 1};
  const auto absent = classification_report(truth, all_b, vocab);
  CHECK(absent.classes[0].precision == 0.0);
  CHECK(absent.classes[0].f1 == 0.0);

  CHECK_THROWS_AS(classification_report(truth, std::vector<int>{0}, vocab), Error);
  CHECK_THROWS_AS(classification_report(truth, std::vector<int>{0, 0, 2, 0}, vocab), Error);

  const auto text = r.to_text();
  CHECK(text.find("Precision") != std::string::npos);
  CHECK(text.find("F1-Score") != std::string::npos);
  CHECK(text.find("0.67") != std::string::npos);
  CHECK(text.find("Accuracy") != std::string::npos);
  CHECK(r.to_json()["accuracy"] == 0.75);
}

TEST_CASE("classification report: random identities") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> lab(0, 4);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t(60), p(60);
    for (auto& v : t) v = lab(rng);
    for (auto& v : p) v = lab(rng);
    const auto r = classification_report(t, p, vocab);
    const auto cm = confusion_matrix(t, p, vocab);
    REQUIRE(report_from_confusion(cm, vocab) == r);
    std::size_t trace = 0, total = 0, support = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      trace += cm[i][i];
      for (auto v : cm[i]) total += v;
      support += r.classes[i].support;
      const auto& c = r.classes[i];
      if (c.precision + c.recall > 0) {
        REQUIRE(std::abs(c.f1 - 2 * c.precision * c.recall / (c.precision + c.recall)) < 1e-12);
      }
    }
    REQUIRE(total == 60);
    REQUIRE(support == 60);
    REQUIRE(r.accuracy == static_cast<double>(trace) / 60.0);
  }
}

TEST_CASE("dataset CSV round trip") {
  const auto ds = blobs(4, 3, 5, 0.5, 13);
  auto dir = oracle::temp_dir("learn");
  write_dataset_csv(ds, dir / "d.csv");
  const auto back = read_dataset_csv(dir / "d.csv", ds.vocab);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK_THROWS_AS(read_dataset_csv(dir / "d.csv", {"only"}), Error);
}
