#include "pslab/metrics.hpp"

#include <numeric>
#include <stdexcept>

namespace pslab {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) *
                  static_cast<std::size_t>(num_classes),
              0) {
  if (num_classes < 1) {
    throw std::invalid_argument("ConfusionMatrix: num_classes must be >= 1");
  }
}

void ConfusionMatrix::add(Label truth, Label predicted, std::int64_t count) {
  if (truth < 0 || truth >= num_classes_ || predicted < 0 ||
      predicted >= num_classes_) {
    throw std::invalid_argument("ConfusionMatrix: label out of range");
  }
  counts_[static_cast<std::size_t>(truth) * num_classes_ +
          static_cast<std::size_t>(predicted)] += count;
}

std::int64_t ConfusionMatrix::at(Label truth, Label predicted) const {
  return counts_[static_cast<std::size_t>(truth) * num_classes_ +
                 static_cast<std::size_t>(predicted)];
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int c = 0; c < num_classes_; ++c) t += at(c, c);
  return t;
}

double cohen_kappa(const ConfusionMatrix& cm) {
  const double total = static_cast<double>(cm.total());
  if (total <= 0.0) {
    throw std::invalid_argument("cohen_kappa: empty confusion matrix");
  }
  const double p_o = static_cast<double>(cm.trace()) / total;
  double p_e = 0.0;
  for (int c = 0; c < cm.num_classes(); ++c) {
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < cm.num_classes(); ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    p_e += static_cast<double>(row) * static_cast<double>(col) / (total * total);
  }
  if (p_e >= 1.0) return 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double micro_accuracy(const ConfusionMatrix& cm) {
  const double total = static_cast<double>(cm.total());
  if (total <= 0.0) {
    throw std::invalid_argument("micro_accuracy: empty confusion matrix");
  }
  return static_cast<double>(cm.trace()) / total;
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) {
    throw std::invalid_argument("macro_f1: empty confusion matrix");
  }
  double sum = 0.0;
  for (int c = 0; c < cm.num_classes(); ++c) {
    const std::int64_t tp = cm.at(c, c);
    std::int64_t fp = 0, fn = 0;
    for (int j = 0; j < cm.num_classes(); ++j) {
      if (j != c) {
        fp += cm.at(j, c);
        fn += cm.at(c, j);
      }
    }
    const double precision =
        (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall =
        (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = (precision + recall) > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    sum += f1;
  }
  return sum / static_cast<double>(cm.num_classes());
}

ConfusionMatrix rollup_confusion(const ConfusionMatrix& cm,
                                 const LabelSpace& space) {
  if (cm.num_classes() != space.num_classes()) {
    throw std::invalid_argument("rollup_confusion: K mismatch");
  }
  ConfusionMatrix parent(space.num_parents());
  for (int i = 0; i < cm.num_classes(); ++i) {
    for (int j = 0; j < cm.num_classes(); ++j) {
      const std::int64_t n = cm.at(i, j);
      if (n != 0) parent.add(to_parent(space, i), to_parent(space, j), n);
    }
  }
  return parent;
}

MetricsReport metrics_report(const ConfusionMatrix& cm, MetricLevel level) {
  MetricsReport report;
  report.kappa = cohen_kappa(cm);
  report.accuracy = micro_accuracy(cm);
  report.macro_f1 = macro_f1(cm);
  report.level = level;
  return report;
}

const char* metric_level_name(MetricLevel level) {
  return level == MetricLevel::fine ? "fine" : "parent";
}

}  // namespace pslab
