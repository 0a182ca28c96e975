#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace pslab {

struct Dataset;

/// Per-class sample counts N_c over a fixed label space of K classes.
struct ClassHistogram {
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
  int num_classes() const { return static_cast<int>(counts.size()); }
};

/// Imbalance diagnostics for one dataset slice (optionally paired with a
/// reference distribution).
struct ImbalanceReport {
  double gini = 0.0;
  std::optional<double> bhattacharyya;
};

/// Gini coefficient of the class counts: sum_ij |x_i - x_j| / (2 K^2 mu).
/// 0 for a perfectly balanced histogram, (K-1)/K when a single class holds
/// all mass. Throws std::invalid_argument on an all-zero histogram.
double gini_coefficient(const ClassHistogram& hist);

/// Bhattacharyya distance -ln sum_c sqrt(p_c q_c) between the normalized
/// distributions; 0 iff equal, +infinity for disjoint supports.
/// Throws std::invalid_argument on mismatched K or an empty histogram.
double bhattacharyya_distance(const ClassHistogram& p, const ClassHistogram& q);

/// Histogram over the whole dataset.
ClassHistogram class_histogram(const Dataset& dataset);

/// Histogram over a subset of sample indices.
ClassHistogram class_histogram(const Dataset& dataset,
                               const std::vector<std::size_t>& indices);

}  // namespace pslab
