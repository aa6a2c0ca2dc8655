#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

#include "srkde/special_math.hpp"

namespace srkde {

/// exp(t) overflows double a little above 709; exponents past this bound
/// are treated as +inf so eval flushes cleanly to zero.
inline constexpr double kExpOverflow = 700.0;

/// exp(t) is exactly 0.0 in double below roughly -745; log-density values
/// under this bound carry no information and are reported as -inf.
inline constexpr double kLogFlushZero = -750.0;

/// Radially symmetric kernel c * exp(-|x|^{2m} / (2 sigma^2)) on R^m with
/// c = sqrt(2) Gamma(m/2 + 1) / (pi^{(m+1)/2} sigma).  At m = 1 this is
/// exactly the Gaussian density with standard deviation sigma.
class SuperRadiusKernel {
 public:
  SuperRadiusKernel(std::size_t m, double sigma)
      : m_(m),
        sigma_(sigma),
        constant_(kernel_constant(m, sigma)),
        log_constant_(std::log(constant_)),
        log_two_sigma_sq_(std::log(2.0 * sigma * sigma)) {}

  std::size_t dimension() const { return m_; }
  double sigma() const { return sigma_; }
  double constant() const { return constant_; }
  double log_constant() const { return log_constant_; }

  /// |x|^{2m} / (2 sigma^2) computed from |x|^2 in log space, so that
  /// m-fold powers of tiny or huge radii neither underflow to a false
  /// zero nor overflow before the comparison against kExpOverflow.
  double exponent_from_squared_norm(double squared) const {
    if (squared == 0.0) return 0.0;
    const double logt = static_cast<double>(m_) * std::log(squared) -
                        log_two_sigma_sq_;
    if (logt > kExpOverflow) {
      return std::numeric_limits<double>::infinity();
    }
    return std::exp(logt);
  }

  double eval_from_squared_norm(double squared) const {
    const double t = exponent_from_squared_norm(squared);
    if (std::isinf(t)) return 0.0;
    return constant_ * std::exp(-t);
  }

  double operator()(std::span<const double> x) const {
    check_same_dimension(m_, x.size(), "kernel argument");
    return eval_from_squared_norm(squared_norm(x));
  }

  /// log K(x); returns -inf once the density is below the smallest
  /// positive double, so exp(log_eval(x)) == eval(x) wherever the
  /// density is representable.
  double log_eval(std::span<const double> x) const {
    check_same_dimension(m_, x.size(), "kernel argument");
    const double t = exponent_from_squared_norm(squared_norm(x));
    if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
    const double v = log_constant_ - t;
    if (v < kLogFlushZero) return -std::numeric_limits<double>::infinity();
    return v;
  }

 private:
  std::size_t m_;
  double sigma_;
  double constant_;
  double log_constant_;
  double log_two_sigma_sq_;
};

namespace detail {

/// One adaptive-Simpson refinement step on [a, b] with precomputed
/// endpoint/midpoint integrand values and the whole-panel estimate.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h6 = (b - a) / 12.0;
  const double left = h6 * (fa + 4.0 * flm + fm);
  const double right = h6 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integral of the kernel over R^m, reduced to the radial integral
/// int_0^inf K(r) S_m(r) dr with S_m the sphere surface area.  A correct
/// kernel returns 1 to near machine precision; used as a self-check.
inline double normalization_check(std::size_t m, double sigma,
                                  std::size_t quadrature_points = 4096) {
  check_dimension(m);
  if (!(sigma > 0.0)) {
    throw std::domain_error("bandwidth must be positive, got " +
                            std::to_string(sigma));
  }
  if (quadrature_points < 100) {
    throw std::invalid_argument("quadrature_points must be at least 100");
  }
  const SuperRadiusKernel kernel(m, sigma);
  const double md = static_cast<double>(m);
  // Surface area of the unit sphere; radial factor r^{m-1} is folded
  // into the integrand to avoid recomputing the Gamma term.
  const double surface =
      2.0 * std::pow(std::numbers::pi, 0.5 * md) / gamma(0.5 * md);
  const auto integrand = [&](double r) {
    if (r <= 0.0) return m == 1 ? surface * kernel.constant() : 0.0;
    return surface * std::pow(r, md - 1.0) *
           kernel.eval_from_squared_norm(r * r);
  };
  // Integrand is below e^{-40} of its scale once r^{2m}/(2 sigma^2) > 40:
  // truncate at R = (80 sigma^2)^{1/(2m)}, evaluated in log space.
  const double upper =
      std::exp((std::log(80.0) + 2.0 * std::log(sigma)) / (2.0 * md));
  const std::size_t panels = quadrature_points;
  const double h = upper / static_cast<double>(panels);
  const double tol = 1e-13 / static_cast<double>(panels);
  double total = 0.0;
  double fa = integrand(0.0);
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = h * static_cast<double>(i);
    const double b = h * static_cast<double>(i + 1);
    const double mid = 0.5 * (a + b);
    const double fm = integrand(mid);
    const double fb = integrand(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::adaptive_simpson(integrand, a, b, fa, fm, fb, whole, tol,
                                      24);
    fa = fb;
  }
  return total;
}

}  // namespace srkde
