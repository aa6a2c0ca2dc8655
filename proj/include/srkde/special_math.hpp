#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace srkde {

/// Largest vector-space dimension the library accepts. Beyond this the
/// r^{2m} terms of the kernel are dominated by floating-point over- and
/// underflow, so results would be meaningless in double precision.
inline constexpr std::size_t kMaxDimension = 64;

inline void check_dimension(std::size_t m) {
  if (m < 1 || m > kMaxDimension) {
    throw std::invalid_argument("dimension must be in [1, " +
                                std::to_string(kMaxDimension) + "], got " +
                                std::to_string(m));
  }
}

inline void check_same_dimension(std::size_t expected, std::size_t got,
                                 const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + " has dimension " +
                                std::to_string(got) + ", expected " +
                                std::to_string(expected));
  }
}

/// Gamma(x) for x > 0, accurate to at least 12 significant digits on
/// [0.5, 50] (covers m/2 and m/2+1 for every supported dimension).
inline double gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("gamma requires x > 0, got " + std::to_string(x));
  }
  return std::tgamma(x);
}

/// Volume of the unit ball in R^m: pi^{m/2} / Gamma(m/2 + 1).
inline double unit_ball_volume(std::size_t m) {
  check_dimension(m);
  return std::pow(std::numbers::pi, 0.5 * static_cast<double>(m)) /
         gamma(0.5 * static_cast<double>(m) + 1.0);
}

/// Surface area of the sphere of radius r in R^m:
/// 2 pi^{m/2} r^{m-1} / Gamma(m/2).  For m = 1 this is the two endpoints
/// of an interval, i.e. the constant 2.
inline double sphere_surface_area(std::size_t m, double r) {
  check_dimension(m);
  const double md = static_cast<double>(m);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * md) *
         std::pow(r, md - 1.0) / gamma(0.5 * md);
}

/// Peak value of the super-radius kernel:
/// sqrt(2) Gamma(m/2 + 1) / (pi^{(m+1)/2} sigma).
inline double kernel_constant(std::size_t m, double sigma) {
  check_dimension(m);
  if (!(sigma > 0.0)) {
    throw std::domain_error("bandwidth must be positive, got " +
                            std::to_string(sigma));
  }
  const double md = static_cast<double>(m);
  return std::numbers::sqrt2 * gamma(0.5 * md + 1.0) /
         (std::pow(std::numbers::pi, 0.5 * (md + 1.0)) * sigma);
}

inline double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace srkde
