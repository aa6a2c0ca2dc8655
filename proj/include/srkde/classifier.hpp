#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srkde/dataset.hpp"
#include "srkde/estimator.hpp"

namespace srkde {

/// Per-query neighbor cap used when the caller gives none: each class
/// density is summed over at most this many nearest training points.
inline constexpr std::size_t kDefaultKPrime = 64;

struct Likelihoods {
  std::vector<double> values;  // one per class, model ordering, sums to 1
  /// Set when every class density underflowed to zero at the query and
  /// the uniform fallback was applied.
  bool degenerate = false;
};

/// One variable-bandwidth density model per class; queries are scored by
///   L_j(v) = |S_j| f_j(v) / sum_h |S_h| f_h(v).
/// The class counts cancel the 1/|S_j| inside each density, so a class
/// score is just the log-sum of that class's kernel terms at v.
class ClassifierModel {
 public:
  ClassifierModel(std::vector<ClassSummary> classes,
                  std::vector<SRKDEModel> models, std::size_t k_prime)
      : classes_(std::move(classes)),
        models_(std::move(models)),
        k_prime_(k_prime) {
    if (classes_.empty() || classes_.size() != models_.size()) {
      throw std::invalid_argument("need one model per class");
    }
    if (k_prime_ < 1) {
      throw std::invalid_argument("per-query neighbor cap must be positive");
    }
    for (std::size_t j = 0; j < classes_.size(); ++j) {
      if (models_[j].size() != classes_[j].count) {
        throw std::invalid_argument("class count does not match its model");
      }
    }
  }

  std::size_t class_count() const { return classes_.size(); }
  const std::vector<ClassSummary>& classes() const { return classes_; }
  const std::vector<SRKDEModel>& models() const { return models_; }
  std::size_t k_prime() const { return k_prime_; }
  std::size_t dimension() const { return models_.front().dimension(); }
  std::size_t neighbor_order() const {
    return models_.front().neighbor_order();
  }
  double beta() const { return models_.front().beta(); }

  /// log(|S_j| f_j(v)) for one class, computed entirely in log space
  /// with a max-shift so exponent underflow cannot zero the score.
  double class_score(std::size_t j, std::span<const double> v) const {
    const SRKDEModel& model = models_[j];
    const std::size_t cap = std::min(k_prime_, model.size());
    const std::vector<Neighbor> nearest = model.index().k_nearest(v, cap);
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(nearest.size());
    for (const Neighbor& nb : nearest) {
      const double sq = squared_distance(model.data().point(nb.index), v);
      const double lt = model.log_term(nb.index, sq);
      logs.push_back(lt);
      max_log = std::max(max_log, lt);
    }
    if (std::isinf(max_log)) return max_log;
    double sum = 0.0;
    for (double lt : logs) sum += std::exp(lt - max_log);
    return max_log + std::log(sum);
  }

  Likelihoods likelihoods(std::span<const double> v) const {
    check_same_dimension(dimension(), v.size(), "query point");
    std::vector<double> scores(class_count());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < class_count(); ++j) {
      scores[j] = class_score(j, v);
      best = std::max(best, scores[j]);
    }
    Likelihoods out;
    out.values.resize(class_count());
    if (std::isinf(best)) {
      const double uniform = 1.0 / static_cast<double>(class_count());
      std::fill(out.values.begin(), out.values.end(), uniform);
      out.degenerate = true;
      return out;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < class_count(); ++j) {
      out.values[j] = std::exp(scores[j] - best);
      total += out.values[j];
    }
    for (double& value : out.values) value /= total;
    return out;
  }

  std::size_t predict_index(std::span<const double> v) const {
    const Likelihoods lk = likelihoods(v);
    std::size_t best = 0;
    for (std::size_t j = 1; j < lk.values.size(); ++j) {
      if (lk.values[j] > lk.values[best]) best = j;
    }
    return best;
  }

  const std::string& predict(std::span<const double> v) const {
    return classes_[predict_index(v)].label;
  }

 private:
  std::vector<ClassSummary> classes_;
  std::vector<SRKDEModel> models_;
  std::size_t k_prime_;
};

/// Fits one density model per class with a shared neighbor order and
/// smoothing parameter.
inline ClassifierModel train(const LabeledDataset& d, std::size_t k,
                             double beta,
                             std::size_t k_prime = kDefaultKPrime) {
  if (k < 1) throw std::invalid_argument("neighbor order must be positive");
  for (const ClassSummary& c : d.classes()) {
    if (c.count < k + 1) {
      throw std::invalid_argument(
          "class \"" + c.label + "\" has " + std::to_string(c.count) +
          " points; neighbor order " + std::to_string(k) + " needs at least " +
          std::to_string(k + 1));
    }
  }
  std::vector<SRKDEModel> models;
  models.reserve(d.class_count());
  for (std::size_t j = 0; j < d.class_count(); ++j) {
    models.emplace_back(std::make_shared<const Dataset>(d.class_points(j)), k,
                        beta);
  }
  return ClassifierModel(d.classes(), std::move(models), k_prime);
}

}  // namespace srkde
