#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "neurolesion/matrix.hpp"

namespace neurolesion {

inline constexpr int kDaysPerYear = 365;
inline constexpr int kFeatureYears = 5;

// Synthetic daily power-consumption series: five feature years predict the
// same day of year six. Leap days are ignored.
struct DatasetParams {
  double base = 100.0;
  double trend = 3.0;
  double seasonal = 20.0;
  double weekly = 5.0;
  double noise_sigma = 2.0;

  void validate() const;
};

struct Sample {
  std::array<double, kFeatureYears> features{};
  double target = 0.0;
};

struct Dataset {
  std::vector<Sample> rows;  // exactly 365
};

// consumption(year, day) = base + trend*year + seasonal*sin(2*pi*day/365)
// + weekly*sin(2*pi*day/7) + N(0, sigma^2); pure function of (seed, params).
Dataset generate_dataset(std::uint64_t seed, const DatasetParams& params = {});

struct MinMax {
  double lo = 0.0;
  double hi = 0.0;
};

struct NormStats {
  std::array<MinMax, kFeatureYears> features{};
  MinMax target;
};

// Min-max stats over the given row indices only, so a fold's test rows never
// leak into its training normalization.
NormStats compute_norm_stats(const Dataset& data, const std::vector<int>& indices);

Vector normalize_features(const Sample& sample, const NormStats& stats);
double normalize_target(double target, const NormStats& stats);
double denormalize_target(double normalized, const NormStats& stats);

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> test_folds;

  std::vector<int> train_indices(int fold, int n) const;
};

// Shuffle 0..n-1, then cut into k contiguous chunks whose sizes differ by at
// most one; each chunk is one fold's test set.
FoldPlan kfold_split(int n, int k, std::uint64_t seed);

// CSV with header day,y1,y2,y3,y4,y5,target.
std::string dataset_to_csv(const Dataset& data);

}  // namespace neurolesion
