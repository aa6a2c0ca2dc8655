#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srkde/special_math.hpp"

namespace srkde {

/// Immutable row-major point set in R^m.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<double> values)
      : dim_(dim), values_(std::move(values)) {
    check_dimension(dim_);
    if (values_.empty() || values_.size() % dim_ != 0) {
      throw std::invalid_argument(
          "dataset values must hold a positive multiple of dim doubles");
    }
  }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return values_.size() / dim_; }

  std::span<const double> point(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

struct ClassSummary {
  std::string label;
  std::size_t count = 0;
};

/// Point set with one string label per point.  Classes are ordered by
/// first appearance in the input; that order is the tie-break order for
/// classification and the serialization order for models.
class LabeledDataset {
 public:
  LabeledDataset(Dataset data, std::vector<std::string> labels)
      : data_(std::move(data)) {
    if (labels.size() != data_.size()) {
      throw std::invalid_argument("label count does not match point count");
    }
    class_of_.reserve(labels.size());
    for (auto& label : labels) {
      std::size_t id = classes_.size();
      for (std::size_t c = 0; c < classes_.size(); ++c) {
        if (classes_[c].label == label) {
          id = c;
          break;
        }
      }
      if (id == classes_.size()) classes_.push_back({label, 0});
      ++classes_[id].count;
      class_of_.push_back(id);
    }
    for (const auto& c : classes_) {
      if (c.count < 2) {
        throw std::invalid_argument("class \"" + c.label +
                                    "\" has fewer than 2 points");
      }
    }
  }

  const Dataset& data() const { return data_; }
  std::size_t size() const { return data_.size(); }
  std::size_t dimension() const { return data_.dimension(); }

  std::size_t class_count() const { return classes_.size(); }
  const std::vector<ClassSummary>& classes() const { return classes_; }
  std::size_t class_of(std::size_t i) const { return class_of_[i]; }

  /// Points of one class, packed in their original relative order.
  Dataset class_points(std::size_t class_id) const {
    std::vector<double> values;
    values.reserve(classes_[class_id].count * dimension());
    for (std::size_t i = 0; i < size(); ++i) {
      if (class_of_[i] == class_id) {
        auto p = data_.point(i);
        values.insert(values.end(), p.begin(), p.end());
      }
    }
    return Dataset(dimension(), std::move(values));
  }

 private:
  Dataset data_;
  std::vector<ClassSummary> classes_;
  std::vector<std::size_t> class_of_;
};

}  // namespace srkde
