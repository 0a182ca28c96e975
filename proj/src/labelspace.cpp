#include "pslab/labelspace.hpp"

#include <stdexcept>
#include <string>

namespace pslab {

LabelSpace::LabelSpace(int num_classes, std::vector<std::string> class_names,
                       std::vector<int> parent_of, int num_parents)
    : num_classes_(num_classes),
      num_parents_(num_parents),
      class_names_(std::move(class_names)),
      parent_of_(std::move(parent_of)) {
  if (num_classes_ < 2) {
    throw std::invalid_argument("LabelSpace: num_classes must be >= 2");
  }
  if (num_parents_ < 1 || num_parents_ > num_classes_) {
    throw std::invalid_argument(
        "LabelSpace: num_parents must be in [1, num_classes]");
  }
  if (static_cast<int>(class_names_.size()) != num_classes_) {
    throw std::invalid_argument("LabelSpace: need one name per class");
  }
  if (static_cast<int>(parent_of_.size()) != num_classes_) {
    throw std::invalid_argument("LabelSpace: parent table must have K entries");
  }
  std::vector<bool> used(static_cast<std::size_t>(num_parents_), false);
  for (int p : parent_of_) {
    if (p < 0 || p >= num_parents_) {
      throw std::invalid_argument("LabelSpace: parent index out of range");
    }
    used[static_cast<std::size_t>(p)] = true;
  }
  for (int p = 0; p < num_parents_; ++p) {
    if (!used[static_cast<std::size_t>(p)]) {
      throw std::invalid_argument("LabelSpace: parent " + std::to_string(p) +
                                  " has no fine class");
    }
  }
}

LabelSpace LabelSpace::identity(int num_classes) {
  std::vector<std::string> names;
  std::vector<int> parents;
  names.reserve(static_cast<std::size_t>(num_classes));
  parents.reserve(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    names.push_back("class_" + std::to_string(c));
    parents.push_back(c);
  }
  return LabelSpace(num_classes, std::move(names), std::move(parents),
                    num_classes);
}

Label to_parent(const LabelSpace& space, Label label) {
  if (!space.valid_label(label)) {
    throw std::invalid_argument("to_parent: label out of range");
  }
  return space.parent_table()[static_cast<std::size_t>(label)];
}

}  // namespace pslab
