#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "srkde/dataset.hpp"
#include "srkde/kdtree.hpp"
#include "srkde/kernel.hpp"
#include "srkde/special_math.hpp"

namespace srkde {

/// z_i = |s_i - center|^m for every point: the one-dimensional shadow of
/// the data whose density at zero is unit_ball_volume(m) times the
/// original density at the center.
inline std::vector<double> super_radius_transform(const Dataset& data,
                                                  std::span<const double> center) {
  check_same_dimension(data.dimension(), center.size(), "transform center");
  const double half_m = 0.5 * static_cast<double>(data.dimension());
  std::vector<double> z(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    z[i] = std::pow(squared_distance(data.point(i), center), half_m);
  }
  return z;
}

/// Boundary-corrected estimate of the transformed density at zero:
/// (1/n) sum sqrt(2)/(sqrt(pi) sigma) exp(-z_i^2 / 2 sigma^2).  The
/// sqrt(2) doubles the half-line kernel mass because z never goes
/// negative.
inline double estimate_fz0(std::span<const double> z, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("bandwidth must be positive, got " +
                            std::to_string(sigma));
  }
  if (z.empty()) {
    throw std::invalid_argument("estimate_fz0 requires at least one value");
  }
  const double scale = std::numbers::sqrt2 /
                       (std::sqrt(std::numbers::pi) * sigma);
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  for (double zi : z) {
    sum += std::exp(-zi * zi * inv_two_sigma_sq);
  }
  return scale * sum / static_cast<double>(z.size());
}

/// Fixed-bandwidth density estimator: (1/n) sum K(s_i - v) with the
/// super-radius kernel at sigma = lambda n^{-1/3}.  Its pointwise MSE
/// shrinks as O(n^{-2/3}) for this bandwidth schedule.
class FixedEstimator {
 public:
  FixedEstimator(std::shared_ptr<const Dataset> data, double lambda)
      : FixedEstimator(data, lambda,
                       lambda * std::pow(
                                    static_cast<double>(check(data)->size()),
                                    -1.0 / 3.0)) {
    if (!(lambda > 0.0)) {
      throw std::domain_error("rate constant must be positive, got " +
                              std::to_string(lambda));
    }
  }

  /// Builds the estimator from the bandwidth itself, which is kept
  /// exactly; lambda is derived as sigma n^{1/3} for bookkeeping.
  static FixedEstimator with_sigma(std::shared_ptr<const Dataset> data,
                                   double sigma) {
    if (!(sigma > 0.0)) {
      throw std::domain_error("bandwidth must be positive, got " +
                              std::to_string(sigma));
    }
    const double n = static_cast<double>(check(data)->size());
    return FixedEstimator(std::move(data), sigma * std::cbrt(n), sigma);
  }

  const Dataset& data() const { return *data_; }
  std::size_t dimension() const { return data_->dimension(); }
  double lambda() const { return lambda_; }
  double sigma() const { return sigma_; }
  const SuperRadiusKernel& kernel() const { return kernel_; }

  double estimate(std::span<const double> v) const {
    check_same_dimension(dimension(), v.size(), "evaluation point");
    double sum = 0.0;
    for (std::size_t i = 0; i < data_->size(); ++i) {
      sum += kernel_.eval_from_squared_norm(
          squared_distance(data_->point(i), v));
    }
    return sum / static_cast<double>(data_->size());
  }

 private:
  FixedEstimator(std::shared_ptr<const Dataset> data, double lambda,
                 double sigma)
      : data_(std::move(data)),
        lambda_(lambda),
        sigma_(sigma),
        kernel_(data_->dimension(), sigma) {}

  static const std::shared_ptr<const Dataset>& check(
      const std::shared_ptr<const Dataset>& data) {
    if (!data) throw std::invalid_argument("estimator requires a dataset");
    return data;
  }

  std::shared_ptr<const Dataset> data_;
  double lambda_;
  double sigma_;
  SuperRadiusKernel kernel_;
};

/// Neighbor order used by the command-line tools when the caller gives
/// none: ceil(sqrt(n)).
inline std::size_t default_neighbor_order(std::size_t n) {
  if (n < 2) throw std::invalid_argument("need at least 2 points");
  const auto k = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(n))));
  return std::min(k, n - 1);
}

/// Smoothing parameter from a dimensionless coefficient: beta0 n^{2/3}.
inline double beta_from_coefficient(double beta0, std::size_t n) {
  if (!(beta0 > 0.0)) {
    throw std::domain_error("smoothing coefficient must be positive");
  }
  return beta0 * std::pow(static_cast<double>(n), 2.0 / 3.0);
}

/// Variable-bandwidth density estimator: each data point carries its own
/// bandwidth sigma_i = beta R_k(s_i)^m / k, so the kernel widens where
/// data is sparse.  The estimate is
///   (1/n) sum_i c(sigma_i) exp(-|s_i - v|^{2m} / 2 sigma_i^2)
/// with c the kernel peak constant.
class SRKDEModel {
 public:
  SRKDEModel(std::shared_ptr<const Dataset> data, std::size_t k, double beta)
      : data_(require(std::move(data))),
        k_(k),
        beta_(beta),
        index_(std::make_shared<const KdTreeIndex>(data_)) {
    if (data_->size() < 2) {
      throw std::invalid_argument(
          "variable-bandwidth estimation needs at least 2 points");
    }
    if (k < 1 || k + 1 > data_->size()) {
      throw std::invalid_argument("neighbor order must be in [1, n-1]");
    }
    if (!(beta > 0.0)) {
      throw std::domain_error("smoothing parameter must be positive, got " +
                              std::to_string(beta));
    }
    const std::vector<double> radii = index_->kth_distances(k);
    const double half_m = 0.5 * static_cast<double>(dimension());
    sigmas_.resize(radii.size());
    const double floor = bandwidth_floor();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double rk_m = std::pow(radii[i] * radii[i], half_m);
      sigmas_[i] = std::max(beta * rk_m / static_cast<double>(k), floor);
    }
    finish_terms();
  }

  /// Restores a model from stored bandwidths (deserialization, forced
  /// bandwidth experiments); k and beta are kept for bookkeeping and are
  /// not rederived.
  SRKDEModel(std::shared_ptr<const Dataset> data, std::size_t k, double beta,
             std::vector<double> sigmas)
      : data_(require(std::move(data))),
        k_(k),
        beta_(beta),
        index_(std::make_shared<const KdTreeIndex>(data_)),
        sigmas_(std::move(sigmas)) {
    if (sigmas_.size() != data_->size()) {
      throw std::invalid_argument("bandwidth count does not match points");
    }
    for (double s : sigmas_) {
      if (!(s > 0.0)) {
        throw std::invalid_argument("stored bandwidths must be positive");
      }
    }
    finish_terms();
  }

  const Dataset& data() const { return *data_; }
  std::size_t dimension() const { return data_->dimension(); }
  std::size_t size() const { return data_->size(); }
  std::size_t neighbor_order() const { return k_; }
  double beta() const { return beta_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  const KdTreeIndex& index() const { return *index_; }

  /// The clamp applied to sigma_i so duplicate points (R_k = 0) cannot
  /// produce a zero bandwidth.  Scales with the data's extent.
  double bandwidth_floor() const {
    double diag_sq = 0.0;
    const std::size_t m = dimension();
    for (std::size_t d = 0; d < m; ++d) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = 0; i < data_->size(); ++i) {
        const double v = data_->point(i)[d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      diag_sq += (hi - lo) * (hi - lo);
    }
    const double diag_m = std::pow(diag_sq, 0.5 * static_cast<double>(m));
    return 1e-12 * (diag_m / static_cast<double>(k_) + 1.0);
  }

  double estimate(std::span<const double> v) const {
    check_same_dimension(dimension(), v.size(), "evaluation point");
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      sum += term(i, squared_distance(data_->point(i), v));
    }
    return sum / static_cast<double>(size());
  }

  /// Truncated estimate over the k_prime nearest instances to v.  The
  /// divisor stays n: dropped tail terms are treated as zero, not
  /// renormalized away.  Terms are added in ascending instance order so
  /// k_prime = n reproduces the full estimate bit for bit.
  double estimate(std::span<const double> v, std::size_t k_prime) const {
    check_same_dimension(dimension(), v.size(), "evaluation point");
    if (k_prime < 1 || k_prime > size()) {
      throw std::invalid_argument("truncation order must be in [1, n]");
    }
    std::vector<Neighbor> nearest = index_->k_nearest(v, k_prime);
    std::vector<std::size_t> ids(nearest.size());
    for (std::size_t i = 0; i < nearest.size(); ++i) {
      ids[i] = nearest[i].index;
    }
    std::sort(ids.begin(), ids.end());
    double sum = 0.0;
    for (std::size_t id : ids) {
      sum += term(id, squared_distance(data_->point(id), v));
    }
    return sum / static_cast<double>(size());
  }

 private:
  static std::shared_ptr<const Dataset> require(
      std::shared_ptr<const Dataset> data) {
    if (!data) throw std::invalid_argument("estimator requires a dataset");
    return data;
  }

  void finish_terms() {
    const std::size_t m = dimension();
    constants_.resize(sigmas_.size());
    log_constants_.resize(sigmas_.size());
    log_two_sigma_sq_.resize(sigmas_.size());
    for (std::size_t i = 0; i < sigmas_.size(); ++i) {
      if (!std::isfinite(sigmas_[i])) {
        throw std::runtime_error("per-point bandwidth is not finite");
      }
      constants_[i] = kernel_constant(m, sigmas_[i]);
      log_constants_[i] = std::log(constants_[i]);
      log_two_sigma_sq_[i] = std::log(2.0 * sigmas_[i] * sigmas_[i]);
    }
  }

 public:
  /// log of one estimator term, log c(sigma_i) - |s_i - v|^{2m} /
  /// (2 sigma_i^2), given the squared distance; -inf once the term's
  /// linear value is zero (same flush convention as the kernel's own
  /// log_eval).  Lets callers combine terms without leaving log space.
  double log_term(std::size_t i, double squared) const {
    if (squared == 0.0) return log_constants_[i];
    const double logt = static_cast<double>(dimension()) * std::log(squared) -
                        log_two_sigma_sq_[i];
    if (logt > kExpOverflow) {
      return -std::numeric_limits<double>::infinity();
    }
    const double value = log_constants_[i] - std::exp(logt);
    if (value < kLogFlushZero) {
      return -std::numeric_limits<double>::infinity();
    }
    return value;
  }

 private:
  /// c(sigma_i) exp(-|s_i - v|^{2m} / 2 sigma_i^2), with the same
  /// log-space exponent guard as the kernel itself.
  double term(std::size_t i, double squared) const {
    if (squared == 0.0) return constants_[i];
    const double logt = static_cast<double>(dimension()) * std::log(squared) -
                        log_two_sigma_sq_[i];
    if (logt > kExpOverflow) return 0.0;
    return constants_[i] * std::exp(-std::exp(logt));
  }

  std::shared_ptr<const Dataset> data_;
  std::size_t k_;
  double beta_;
  std::shared_ptr<const KdTreeIndex> index_;
  std::vector<double> sigmas_;
  std::vector<double> constants_;
  std::vector<double> log_constants_;
  std::vector<double> log_two_sigma_sq_;
};

inline SRKDEModel build_srkde(std::shared_ptr<const Dataset> data,
                              std::size_t k, double beta) {
  return SRKDEModel(std::move(data), k, beta);
}

/// Reconstructs a sampled function f from (point, value) pairs taken at
/// uniform sampling density rho:
///   sum_i (f(s_i) / rho) K(s_i - v).
/// There is deliberately no 1/n factor; rho already carries the scale.
inline double approximate_function(const Dataset& points,
                                   std::span<const double> values, double rho,
                                   double sigma, std::span<const double> v) {
  if (values.size() != points.size()) {
    throw std::invalid_argument("need one value per sample point");
  }
  if (!(rho > 0.0)) {
    throw std::domain_error("sampling density must be positive, got " +
                            std::to_string(rho));
  }
  const SuperRadiusKernel kernel(points.dimension(), sigma);
  check_same_dimension(points.dimension(), v.size(), "evaluation point");
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += values[i] / rho *
           kernel.eval_from_squared_norm(squared_distance(points.point(i), v));
  }
  return sum;
}

}  // namespace srkde
