#include "pslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pslab/data.hpp"

namespace pslab {

std::int64_t ClassHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double gini_coefficient(const ClassHistogram& hist) {
  const std::int64_t total = hist.total();
  if (hist.counts.empty() || total <= 0) {
    throw std::invalid_argument("gini_coefficient: histogram has no mass");
  }
  // Sorted form of the pairwise mean-difference: for ascending x_(i),
  // sum_ij |x_i - x_j| = 2 sum_i (2i - K - 1) x_(i)  (1-based i).
  std::vector<std::int64_t> sorted = hist.counts;
  std::sort(sorted.begin(), sorted.end());
  const double k = static_cast<double>(sorted.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i + 1) - k - 1.0) *
                static_cast<double>(sorted[i]);
  }
  return weighted / (k * static_cast<double>(total));
}

double bhattacharyya_distance(const ClassHistogram& p,
                              const ClassHistogram& q) {
  if (p.counts.size() != q.counts.size()) {
    throw std::invalid_argument(
        "bhattacharyya_distance: histograms over different K");
  }
  const std::int64_t tp = p.total();
  const std::int64_t tq = q.total();
  if (p.counts.empty() || tp <= 0 || tq <= 0) {
    throw std::invalid_argument("bhattacharyya_distance: histogram has no mass");
  }
  double coeff = 0.0;
  for (std::size_t c = 0; c < p.counts.size(); ++c) {
    const double pc = static_cast<double>(p.counts[c]) / static_cast<double>(tp);
    const double qc = static_cast<double>(q.counts[c]) / static_cast<double>(tq);
    coeff += std::sqrt(pc * qc);
  }
  if (coeff <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  // Cauchy-Schwarz keeps coeff <= 1 up to rounding; clamp so D_B >= 0.
  coeff = std::min(coeff, 1.0);
  return -std::log(coeff);
}

ClassHistogram class_histogram(const Dataset& dataset) {
  ClassHistogram hist;
  hist.counts.assign(static_cast<std::size_t>(dataset.space.num_classes()), 0);
  for (const Sample& s : dataset.samples) {
    ++hist.counts[static_cast<std::size_t>(s.label)];
  }
  return hist;
}

ClassHistogram class_histogram(const Dataset& dataset,
                               const std::vector<std::size_t>& indices) {
  ClassHistogram hist;
  hist.counts.assign(static_cast<std::size_t>(dataset.space.num_classes()), 0);
  for (std::size_t i : indices) {
    ++hist.counts[static_cast<std::size_t>(dataset.samples.at(i).label)];
  }
  return hist;
}

}  // namespace pslab
