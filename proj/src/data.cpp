#include "neurolesion/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "neurolesion/errors.hpp"
#include "neurolesion/rng.hpp"

namespace neurolesion {

namespace {
constexpr double kTwoPi = 6.283185307179586;
}

void DatasetParams::validate() const {
  if (!(base > 0.0)) throw ConfigError("dataset base load must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("dataset noise sigma must be >= 0");
}

Dataset generate_dataset(std::uint64_t seed, const DatasetParams& params) {
  params.validate();
  SplitMix64 noise(derive_seed(seed, Stream::kDataNoise));
  // consumption[y][d] for years 1..6, days 1..365
  std::array<std::array<double, kDaysPerYear>, kFeatureYears + 1> series{};
  for (int y = 1; y <= kFeatureYears + 1; ++y) {
    for (int d = 1; d <= kDaysPerYear; ++d) {
      double value = params.base + params.trend * y +
                     params.seasonal * std::sin(kTwoPi * d / kDaysPerYear) +
                     params.weekly * std::sin(kTwoPi * d / 7.0);
      if (params.noise_sigma > 0.0) value += noise.next_gaussian(0.0, params.noise_sigma);
      series[static_cast<std::size_t>(y - 1)][static_cast<std::size_t>(d - 1)] = value;
    }
  }
  Dataset data;
  data.rows.resize(kDaysPerYear);
  for (int d = 0; d < kDaysPerYear; ++d) {
    Sample& row = data.rows[static_cast<std::size_t>(d)];
    for (int y = 0; y < kFeatureYears; ++y)
      row.features[static_cast<std::size_t>(y)] =
          series[static_cast<std::size_t>(y)][static_cast<std::size_t>(d)];
    row.target = series[kFeatureYears][static_cast<std::size_t>(d)];
  }
  return data;
}

NormStats compute_norm_stats(const Dataset& data, const std::vector<int>& indices) {
  if (indices.empty()) throw ConfigError("normalization needs at least one row");
  NormStats stats;
  bool first = true;
  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(data.rows.size()))
      throw ConfigError("normalization index out of range");
    const Sample& row = data.rows[static_cast<std::size_t>(idx)];
    for (int f = 0; f < kFeatureYears; ++f) {
      double v = row.features[static_cast<std::size_t>(f)];
      MinMax& mm = stats.features[static_cast<std::size_t>(f)];
      if (first) {
        mm = {v, v};
      } else {
        mm.lo = std::min(mm.lo, v);
        mm.hi = std::max(mm.hi, v);
      }
    }
    if (first) {
      stats.target = {row.target, row.target};
      first = false;
    } else {
      stats.target.lo = std::min(stats.target.lo, row.target);
      stats.target.hi = std::max(stats.target.hi, row.target);
    }
  }
  return stats;
}

namespace {

double scale01(double v, const MinMax& mm) {
  double span = mm.hi - mm.lo;
  if (span <= 0.0) return 0.0;  // constant feature
  return (v - mm.lo) / span;
}

}  // namespace

Vector normalize_features(const Sample& sample, const NormStats& stats) {
  Vector out(kFeatureYears);
  for (int f = 0; f < kFeatureYears; ++f)
    out[static_cast<std::size_t>(f)] =
        scale01(sample.features[static_cast<std::size_t>(f)], stats.features[static_cast<std::size_t>(f)]);
  return out;
}

double normalize_target(double target, const NormStats& stats) {
  return scale01(target, stats.target);
}

double denormalize_target(double normalized, const NormStats& stats) {
  return stats.target.lo + normalized * (stats.target.hi - stats.target.lo);
}

FoldPlan kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw ConfigError("kfold requires 2 <= k <= n");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(derive_seed(seed, Stream::kKfold));
  seeded_shuffle(order, rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  const int base_size = n / k;
  const int remainder = n % k;
  std::size_t cursor = 0;
  for (int f = 0; f < k; ++f) {
    int size = base_size + (f < remainder ? 1 : 0);
    plan.test_folds.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                 order.begin() + static_cast<std::ptrdiff_t>(cursor + static_cast<std::size_t>(size)));
    cursor += static_cast<std::size_t>(size);
  }
  return plan;
}

std::vector<int> FoldPlan::train_indices(int fold, int n) const {
  if (fold < 0 || fold >= k) throw ConfigError("fold index out of range");
  std::vector<std::uint8_t> in_test(static_cast<std::size_t>(n), 0);
  for (int idx : test_folds[static_cast<std::size_t>(fold)]) in_test[static_cast<std::size_t>(idx)] = 1;
  std::vector<int> train;
  train.reserve(static_cast<std::size_t>(n) - test_folds[static_cast<std::size_t>(fold)].size());
  for (int i = 0; i < n; ++i)
    if (!in_test[static_cast<std::size_t>(i)]) train.push_back(i);
  return train;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "day,y1,y2,y3,y4,y5,target\n";
  for (std::size_t d = 0; d < data.rows.size(); ++d) {
    out += std::to_string(d + 1);
    for (double f : data.rows[d].features) {
      out += ',';
      out += fmt(f);
    }
    out += ',';
    out += fmt(data.rows[d].target);
    out += '\n';
  }
  return out;
}

}  // namespace neurolesion
