#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "srkde/dataset.hpp"
#include "srkde/estimator.hpp"
#include "srkde/mixture.hpp"
#include "srkde/rng.hpp"

namespace srkde {

/// Bandwidth schedule sigma(n) = a (n / n0)^exponent.  The defaults give
/// the schedule under which the fixed estimator's pointwise MSE decays
/// as n^{-2/3}.
struct SigmaRule {
  double a = 0.005;
  double n0 = 10000.0;
  double exponent = -1.0 / 3.0;

  double operator()(std::size_t n) const {
    return a * std::pow(static_cast<double>(n) / n0, exponent);
  }

  void validate() const {
    if (!(a > 0.0) || !(n0 > 0.0)) {
      throw std::invalid_argument("bandwidth rule needs a > 0 and n0 > 0");
    }
    if (!std::isfinite(exponent)) {
      throw std::invalid_argument("bandwidth rule exponent must be finite");
    }
  }
};

/// Default evaluation points for the 4-D benchmark mixture.
inline const std::vector<std::vector<double>>& default_eval_points() {
  static const std::vector<std::vector<double>> points = {
      {0.0, 0.0, 0.0, 0.0},
      {0.05, 0.0, 0.0, 0.0},
      {0.0, 1.0, 0.0, 0.0},
      {0.0, 0.1, 0.0, 0.0},
      {0.05, 0.05, 0.0, 0.0},
  };
  return points;
}

struct ConvergenceConfig {
  std::vector<std::size_t> n_list;
  std::size_t repeats = 100;
  SigmaRule sigma_rule;
  std::vector<std::vector<double>> eval_points = default_eval_points();
  GaussianMixture mixture = benchmark_mixture();
  std::uint64_t seed = 0;

  void validate() const {
    if (n_list.size() < 2) {
      throw std::invalid_argument("need at least 2 sample sizes for a slope");
    }
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
        throw std::invalid_argument(
            "sample sizes must be positive and strictly increasing");
      }
    }
    if (repeats < 2) {
      throw std::invalid_argument("repeats must be at least 2");
    }
    sigma_rule.validate();
    if (eval_points.empty()) {
      throw std::invalid_argument("need at least one evaluation point");
    }
    for (const auto& p : eval_points) {
      check_same_dimension(mixture.dimension(), p.size(), "evaluation point");
    }
    if (!mixture.normalized()) {
      throw std::invalid_argument(
          "mixture weights must sum to 1 for a meaningful error measure");
    }
  }
};

struct PointFit {
  std::vector<double> point;
  double c = 0.0;      // slope of log10 MSE against log10 n
  double delta = 0.0;  // intercept
};

struct ConvergenceResult {
  ConvergenceConfig config;
  /// mse[p][i]: mean squared error at eval point p and sample size
  /// n_list[i].
  std::vector<std::vector<double>> mse;
  std::vector<PointFit> fits;
  /// stream_seeds[i][r]: RNG seed used for (n_list[i], repeat r).
  std::vector<std::vector<std::uint64_t>> stream_seeds;
  /// Wall-clock duration; informational only, never serialized (reports
  /// must be byte-identical across reruns).
  double wall_seconds = 0.0;
};

/// Ordinary least squares of log10(mse) on log10(n); returns (slope,
/// intercept).  The slope is base-invariant; the intercept is reported
/// in the log10 convention.
inline std::pair<double, double> fit_slope(
    std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) {
    throw std::invalid_argument("slope fit needs at least 2 pairs");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [n, mse] : pairs) {
    if (!(n > 0.0) || !(mse > 0.0)) {
      throw std::invalid_argument("slope fit needs positive n and mse");
    }
    const double x = std::log10(n);
    const double y = std::log10(mse);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(pairs.size());
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) {
    throw std::invalid_argument("slope fit needs distinct n values");
  }
  const double c = (count * sxy - sx * sy) / denom;
  const double delta = (sy - c * sx) / count;
  return {c, delta};
}

/// Evaluates one drawn dataset at several points: given (data, sigma,
/// points), returns one density estimate per point.  The default uses
/// the fixed-bandwidth estimator; tests substitute oracles or other
/// estimators to probe the harness itself.
using DatasetEvaluator = std::function<std::vector<double>(
    const Dataset&, double, const std::vector<std::vector<double>>&)>;

namespace detail {

/// Runs fn(0..count-1) on `threads` threads pulling from a shared
/// counter.  The first exception is captured and rethrown after all
/// workers drain.
inline void parallel_for(std::size_t threads, std::size_t count,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Repeated-draw pointwise MSE measurement.  For every (sample size,
/// repeat) an independent dataset is drawn on its own RNG stream, the
/// estimator is evaluated at every point with sigma from the schedule,
/// and squared errors against the exact mixture density are averaged
/// over repeats.  Each squared error lands in a preallocated slot and
/// the reduction runs serially in repeat order, so results are
/// bit-identical for every thread count.
inline ConvergenceResult run_convergence(const ConvergenceConfig& cfg,
                                         std::size_t threads = 1,
                                         DatasetEvaluator evaluator = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  if (!evaluator) {
    evaluator = [](const Dataset& data, double sigma,
                   const std::vector<std::vector<double>>& points) {
      const auto shared = std::make_shared<const Dataset>(data);
      const FixedEstimator est =
          FixedEstimator::with_sigma(shared, sigma);
      std::vector<double> values(points.size());
      for (std::size_t p = 0; p < points.size(); ++p) {
        values[p] = est.estimate(points[p]);
      }
      return values;
    };
  }
  const std::size_t sizes = cfg.n_list.size();
  const std::size_t points = cfg.eval_points.size();

  std::vector<double> truth(points);
  for (std::size_t p = 0; p < points; ++p) {
    truth[p] = cfg.mixture.density(cfg.eval_points[p]);
  }

  ConvergenceResult result;
  result.config = cfg;
  result.stream_seeds.assign(sizes,
                             std::vector<std::uint64_t>(cfg.repeats, 0));
  for (std::size_t i = 0; i < sizes; ++i) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      result.stream_seeds[i][r] =
          cfg.seed ^ static_cast<std::uint64_t>(r) ^ mix_u64(cfg.n_list[i]);
    }
  }

  // squared_errors[(i * repeats + r) * points + p]
  std::vector<double> squared_errors(sizes * cfg.repeats * points, 0.0);
  detail::parallel_for(
      threads, sizes * cfg.repeats, [&](std::size_t task) {
        const std::size_t i = task / cfg.repeats;
        const std::size_t r = task % cfg.repeats;
        const std::size_t n = cfg.n_list[i];
        const Dataset data =
            sample_mixture(cfg.mixture, n, result.stream_seeds[i][r]);
        const std::vector<double> estimates =
            evaluator(data, cfg.sigma_rule(n), cfg.eval_points);
        if (estimates.size() != points) {
          throw std::runtime_error("evaluator returned wrong value count");
        }
        for (std::size_t p = 0; p < points; ++p) {
          const double err = estimates[p] - truth[p];
          squared_errors[task * points + p] = err * err;
        }
      });

  result.mse.assign(points, std::vector<double>(sizes, 0.0));
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t i = 0; i < sizes; ++i) {
      double sum = 0.0;
      for (std::size_t r = 0; r < cfg.repeats; ++r) {
        sum += squared_errors[(i * cfg.repeats + r) * points + p];
      }
      result.mse[p][i] = sum / static_cast<double>(cfg.repeats);
    }
  }

  result.fits.resize(points);
  for (std::size_t p = 0; p < points; ++p) {
    result.fits[p].point = cfg.eval_points[p];
    bool positive = true;
    std::vector<std::pair<double, double>> pairs(sizes);
    for (std::size_t i = 0; i < sizes; ++i) {
      pairs[i] = {static_cast<double>(cfg.n_list[i]), result.mse[p][i]};
      positive = positive && result.mse[p][i] > 0.0;
    }
    if (positive) {
      const auto [c, delta] = fit_slope(pairs);
      result.fits[p].c = c;
      result.fits[p].delta = delta;
    } else {
      // A zero MSE (e.g. the oracle-evaluator plumbing check) has no
      // log-log slope; NaN marks the fit as undefined.
      result.fits[p].c = std::nan("");
      result.fits[p].delta = std::nan("");
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace srkde
