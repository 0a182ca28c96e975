#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pslab/data.hpp"

namespace pslab {

struct SplitSpec {
  double test_fraction = 0.20;
  int validation_target = 5000;
  std::uint64_t seed = 0;
};

/// Disjoint index sets into one dataset; every class present in the dataset
/// appears in train.
struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct FewShotSpec {
  int k = 1;
  std::uint64_t seed = 0;
};

/// Class-aware allocation. Per class with N_c samples:
///   N_c = 1: train.
///   N_c = 2: one to train, the other to validation or test by a
///            deterministic per-class coin.
///   N_c = 3: one to each subset.
///   N_c > 3: one reserved for each subset, then the remainder fills test
///            first and validation second, apportioned to classes by
///            largest-remainder so the pool's class distribution is kept;
///            leftovers go to train.
/// The capacity targets are soft; per-class reservations are never violated.
SplitResult class_aware_split(const Dataset& dataset, const SplitSpec& spec);

/// Per class, draws min(k, available) train samples uniformly without
/// replacement; returns sorted indices. Deterministic given the seed.
std::vector<std::size_t> build_kshot(const std::vector<std::size_t>& train,
                                     const Dataset& dataset,
                                     const FewShotSpec& spec);

/// JSON document with the three index arrays, the spec, the seed, and the
/// fill order used for the N_c > 3 rule.
void save_split(const SplitResult& split, const SplitSpec& spec,
                const std::string& path);
SplitResult load_split(const std::string& path, SplitSpec* spec = nullptr);

}  // namespace pslab
