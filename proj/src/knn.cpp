#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mouseleak/error.hpp"
#include "mouseleak/learn.hpp"

namespace mouseleak::learn {

std::vector<std::size_t> nearest_neighbors(const Matrix& rows, std::span<const double> x,
                                           std::size_t k) {
  if (k < 1 || k > rows.rows()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("k must be in [1, n_samples={}], got {}", rows.rows(), k));
  }
  if (x.size() != rows.cols()) {
    throw Error(ErrorCode::WidthMismatch,
                fmt::format("query has width {}, training rows have {}", x.size(), rows.cols()));
  }
  std::vector<double> dist(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    auto row = rows.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double d = row[c] - x[c];
      acc += d * d;
    }
    dist[r] = acc;
  }
  std::vector<std::size_t> order(rows.rows());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  order.resize(k);
  return order;
}

int knn_classify(const Dataset& train, std::span<const double> x, std::size_t k) {
  train.validate();
  const auto nn = nearest_neighbors(train.features, x, k);
  std::vector<std::size_t> votes(train.n_classes(), 0);
  for (auto i : nn) ++votes[static_cast<std::size_t>(train.labels[i])];
  // max_element returns the first maximum, i.e. the lowest label index.
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

AngleSamples AngleSamples::from_degrees(Matrix features, std::span<const double> angles_deg) {
  if (features.rows() != angles_deg.size()) {
    throw Error(ErrorCode::Schema,
                fmt::format("{} feature rows but {} angle targets", features.rows(),
                            angles_deg.size()));
  }
  AngleSamples s;
  s.features = std::move(features);
  s.targets.reserve(angles_deg.size());
  for (double a : angles_deg) s.targets.push_back(features::encode_angle(a));
  return s;
}

double knn_regress_angle(const AngleSamples& train, std::span<const double> x, std::size_t k) {
  if (train.features.rows() != train.targets.size()) {
    throw Error(ErrorCode::Schema, "angle samples: row and target counts differ");
  }
  const auto nn = nearest_neighbors(train.features, x, k);
  double c = 0.0;
  double s = 0.0;
  for (auto i : nn) {
    c += train.targets[i].cos_val;
    s += train.targets[i].sin_val;
  }
  if (std::hypot(c, s) < 1e-12 * static_cast<double>(k)) {
    throw Error(ErrorCode::Indeterminate,
                "knn_regress_angle: neighbour directions cancel; mean angle undefined");
  }
  return features::decode_angle(c, s);
}

}  // namespace mouseleak::learn
