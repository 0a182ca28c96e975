#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pslab {

/// Dense 0-based class index.
using Label = int;

/// The class universe: K fine classes, their names, and a two-level
/// fine-to-parent hierarchy. Immutable after construction; safe to share
/// across threads.
class LabelSpace {
 public:
  /// Validates K >= 2, name/parent table sizes, parent range, and that every
  /// parent index is used by at least one fine class. Throws
  /// std::invalid_argument on violation.
  LabelSpace(int num_classes, std::vector<std::string> class_names,
             std::vector<int> parent_of, int num_parents);

  /// Identity hierarchy: each class its own parent, generated names.
  static LabelSpace identity(int num_classes);

  int num_classes() const { return num_classes_; }
  int num_parents() const { return num_parents_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<int>& parent_table() const { return parent_of_; }

  bool valid_label(Label label) const {
    return label >= 0 && label < num_classes_;
  }

 private:
  int num_classes_;
  int num_parents_;
  std::vector<std::string> class_names_;
  std::vector<int> parent_of_;
};

/// Maps a fine-class label to its parent-class label.
/// Throws std::invalid_argument for an out-of-range label.
Label to_parent(const LabelSpace& space, Label label);

}  // namespace pslab
