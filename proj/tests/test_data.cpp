#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "neurolesion/data.hpp"
#include "neurolesion/errors.hpp"
#include "neurolesion/rng.hpp"

using namespace neurolesion;

TEST_CASE("constant series when every component is off") {
  DatasetParams p;
  p.noise_sigma = 0;
  p.trend = 0;
  p.seasonal = 0;
  p.weekly = 0;
  Dataset d = generate_dataset(1, p);
  REQUIRE(d.rows.size() == 365);
  for (const auto& row : d.rows) {
    for (double f : row.features) CHECK(f == doctest::Approx(p.base));
    CHECK(row.target == doctest::Approx(p.base));
  }
}

TEST_CASE("generation is a pure function of seed and params") {
  Dataset a = generate_dataset(7);
  Dataset b = generate_dataset(7);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].features == b.rows[i].features);
    CHECK(a.rows[i].target == b.rows[i].target);
  }
  Dataset c = generate_dataset(8);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    if (a.rows[i].target != c.rows[i].target) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("without noise the target is the fifth feature plus one trend step") {
  DatasetParams p;
  p.noise_sigma = 0;
  Dataset d = generate_dataset(3, p);
  for (const auto& row : d.rows)
    CHECK(row.target == doctest::Approx(row.features[4] + p.trend));
}

TEST_CASE("nonpositive base is rejected") {
  DatasetParams p;
  p.base = 0;
  CHECK_THROWS_AS(generate_dataset(1, p), ConfigError);
}

TEST_CASE("normalized training view lies in [0,1]") {
  Dataset d = generate_dataset(11);
  std::vector<int> all(365);
  for (int i = 0; i < 365; ++i) all[static_cast<std::size_t>(i)] = i;
  NormStats stats = compute_norm_stats(d, all);
  for (const auto& row : d.rows) {
    Vector x = normalize_features(row, stats);
    for (double v : x) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    double y = normalize_target(row.target, stats);
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
    CHECK(denormalize_target(y, stats) == doctest::Approx(row.target));
  }
}

TEST_CASE("fold normalization excludes its own test rows") {
  Dataset d = generate_dataset(13);
  FoldPlan plan = kfold_split(365, 5, 13);
  for (int fold = 0; fold < plan.k; ++fold) {
    auto train = plan.train_indices(fold, 365);
    NormStats stats = compute_norm_stats(d, train);
    // recompute by hand from the complement of the test fold
    std::set<int> test(plan.test_folds[static_cast<std::size_t>(fold)].begin(),
                       plan.test_folds[static_cast<std::size_t>(fold)].end());
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 365; ++i) {
      if (test.count(i)) continue;
      lo = std::min(lo, d.rows[static_cast<std::size_t>(i)].target);
      hi = std::max(hi, d.rows[static_cast<std::size_t>(i)].target);
    }
    CHECK(stats.target.lo == lo);
    CHECK(stats.target.hi == hi);
  }
}

TEST_CASE("kfold examples") {
  FoldPlan plan = kfold_split(10, 5, 1);
  std::set<int> seen;
  for (const auto& fold : plan.test_folds) {
    CHECK(fold.size() == 2);
    for (int idx : fold) CHECK(seen.insert(idx).second);
  }
  CHECK(seen.size() == 10);

  FoldPlan year = kfold_split(365, 5, 2);
  for (const auto& fold : year.test_folds) CHECK(fold.size() == 73);

  FoldPlan a = kfold_split(365, 5, 3), b = kfold_split(365, 5, 3);
  CHECK(a.test_folds == b.test_folds);

  CHECK_THROWS_AS(kfold_split(10, 11, 1), ConfigError);
  CHECK_THROWS_AS(kfold_split(10, 1, 1), ConfigError);
}

TEST_CASE("kfold partition property for random n and k") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(400));
    int k = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - 1)));
    FoldPlan plan = kfold_split(n, k, rng.next());
    std::set<int> seen;
    std::size_t min_size = static_cast<std::size_t>(n), max_size = 0;
    for (const auto& fold : plan.test_folds) {
      min_size = std::min(min_size, fold.size());
      max_size = std::max(max_size, fold.size());
      for (int idx : fold) {
        CHECK(idx >= 0);
        CHECK(idx < n);
        CHECK(seen.insert(idx).second);  // disjoint
      }
    }
    CHECK(seen.size() == static_cast<std::size_t>(n));  // exhaustive
    CHECK(max_size - min_size <= 1);                    // balanced
  }
}

TEST_CASE("csv export shape") {
  DatasetParams p;
  p.noise_sigma = 0;
  std::string csv = dataset_to_csv(generate_dataset(1, p));
  CHECK(csv.rfind("day,y1,y2,y3,y4,y5,target\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 366);
  std::string csv2 = dataset_to_csv(generate_dataset(1, p));
  CHECK(csv == csv2);
}
