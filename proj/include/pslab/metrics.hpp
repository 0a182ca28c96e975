#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pslab/labelspace.hpp"

namespace pslab {

/// Square count matrix, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  void add(Label truth, Label predicted, std::int64_t count = 1);
  std::int64_t at(Label truth, Label predicted) const;
  int num_classes() const { return num_classes_; }
  std::int64_t total() const;
  std::int64_t trace() const;

 private:
  int num_classes_;
  std::vector<std::int64_t> counts_;
};

enum class MetricLevel { fine, parent };

struct MetricsReport {
  double kappa = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  MetricLevel level = MetricLevel::fine;
};

/// Cohen's kappa (p_o - p_e) / (1 - p_e); 0 when p_e = 1.
double cohen_kappa(const ConfusionMatrix& cm);

/// Micro accuracy trace/total.
double micro_accuracy(const ConfusionMatrix& cm);

/// Macro F1 averaged over all K declared classes; precision/recall/f1 are 0
/// on empty denominators, so classes absent from the slice count as 0.
double macro_f1(const ConfusionMatrix& cm);

/// Accumulates fine-level cells into parent-level cells via the hierarchy.
ConfusionMatrix rollup_confusion(const ConfusionMatrix& cm,
                                 const LabelSpace& space);

MetricsReport metrics_report(const ConfusionMatrix& cm, MetricLevel level);

const char* metric_level_name(MetricLevel level);

}  // namespace pslab
