#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pslab/labelspace.hpp"

namespace pslab {

/// One labeled observation sequence: day-of-year stamps (strictly increasing,
/// in [1, 366]) with a feature vector of fixed dimension d per step.
struct Sample {
  std::vector<int> times;
  std::vector<std::vector<double>> features;
  Label label = 0;

  std::size_t length() const { return times.size(); }
};

struct Dataset {
  LabelSpace space;
  std::vector<Sample> samples;
  std::string name;

  int feature_dim() const;
};

/// Validates the Sample/Dataset invariants (times increasing, finite features,
/// constant d, labels in range, non-empty). Throws std::invalid_argument.
void validate_dataset(const Dataset& dataset);

bool datasets_equal(const Dataset& a, const Dataset& b);

/// Recipe for a synthetic long-tailed seasonal dataset. Class c receives a
/// sample count proportional to (c+1)^(-imbalance_exponent); each class keeps
/// at least one sample and the counts sum to num_samples exactly.
struct SyntheticSpec {
  int num_classes = 10;
  int feature_dim = 4;
  int num_samples = 1000;
  double imbalance_exponent = 1.5;
  int min_sequence_length = 6;
  int max_sequence_length = 12;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
};

/// Ideal (un-rounded, un-clamped) power-law class weights for the spec,
/// scaled to sum to num_samples. Exposed for diagnostics and tests.
std::vector<double> ideal_class_weights(const SyntheticSpec& spec);

/// Deterministic synthetic generator. Each class has a seasonal Gaussian bump
/// per channel with a class-specific peak day (evenly spaced over [60, 300])
/// and width, plus i.i.d. Gaussian noise; values clipped to [0, 1.2].
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Declarative dataset description; sidecar of the CSV file.
struct Manifest {
  int num_classes = 0;
  int num_parents = 0;
  std::vector<int> parent_of;
  int feature_dim = 0;
  std::vector<std::string> class_names;
  std::vector<int> excluded_classes;
  bool normalize_raw = false;

  LabelSpace label_space() const;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& manifest, const std::string& path);
Manifest manifest_for(const Dataset& dataset);

/// Reads a sample CSV (columns sample_id, day, f0..f{d-1}, label; rows of one
/// sample contiguous and day-sorted). Samples whose label is on the manifest
/// exclusion list are dropped. With normalize_raw, every feature is divided
/// by 1e4, clipped to [0, 1.2], and offset by 1e-4; non-finite raw cells are
/// treated as no-data and set to 0.0 before normalization.
/// Throws std::runtime_error naming the offending row on malformed input.
Dataset load_csv(const std::string& path, const Manifest& manifest);

/// Writes the CSV form read back by load_csv (full round-trip precision).
void write_csv(const Dataset& dataset, const std::string& path);

}  // namespace pslab
