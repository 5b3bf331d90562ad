#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mouseleak/error.hpp"
#include "mouseleak/learn.hpp"

namespace mouseleak::learn {

SplitIndices split_indices(const Dataset& ds, double test_fraction, std::uint64_t seed,
                           bool stratified) {
  ds.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("test_fraction must be in (0, 1), got {}", test_fraction));
  }
  const std::size_t n = ds.n_samples();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "train_test_split: empty dataset");
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));

  std::mt19937_64 rng(seed);
  std::vector<bool> in_test(n, false);

  if (!stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < total; ++i) in_test[order[i]] = true;
  } else {
    std::vector<std::vector<std::size_t>> members(ds.n_classes());
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].size() == 1) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("class '{}' has 1 sample; stratification needs at least 2",
                                ds.vocab[c]));
      }
    }

    // Largest-remainder apportionment of `total` across classes.
    std::vector<std::size_t> take(members.size(), 0);
    std::vector<double> remainder(members.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < members.size(); ++c) {
      const double share = static_cast<double>(members[c].size()) * static_cast<double>(total) /
                           static_cast<double>(n);
      take[c] = static_cast<std::size_t>(std::floor(share + 1e-9));
      remainder[c] = share - static_cast<double>(take[c]);
      assigned += take[c];
    }
    std::vector<std::size_t> by_remainder(members.size());
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total && i < by_remainder.size(); ++i) {
      const std::size_t c = by_remainder[i];
      if (take[c] < members[c].size()) {
        ++take[c];
        ++assigned;
      }
    }

    for (std::size_t c = 0; c < members.size(); ++c) {
      auto& m = members[c];
      std::shuffle(m.begin(), m.end(), rng);
      for (std::size_t i = 0; i < take[c]; ++i) in_test[m[i]] = true;
    }
  }

  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed, bool stratified) {
  auto idx = split_indices(ds, test_fraction, seed, stratified);
  return {ds.subset(idx.train), ds.subset(idx.test)};
}

}  // namespace mouseleak::learn
