#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace entmix {

// Adaptive Simpson quadrature on [a, b] for smooth integrands.
namespace detail {
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("adaptive_simpson: recursion limit reached");
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// tanh-sinh (double exponential) quadrature over (0, 1).  The integrand is
// called as f(x, 1 - x) with both endpoint distances computed accurately, so
// integrable endpoint singularities like x^{-a}(1-x)^{b-1} are handled.
template <typename F>
double tanh_sinh_01(const F& f, double tol, int max_level = 13) {
  constexpr double kHalfPi = 1.5707963267948966;
  const double tmax = 6.0;  // far enough for x^{-a} singularities up to a ~ 0.99
  auto contrib = [&](double t) -> double {
    const double sh = kHalfPi * std::sinh(t);
    // x = 1/(1+e^{-2 sh}), 1-x = 1/(1+e^{2 sh})
    const double x = 1.0 / (1.0 + std::exp(-2.0 * sh));
    const double omx = 1.0 / (1.0 + std::exp(2.0 * sh));
    const double ch = std::cosh(sh);
    const double w = kHalfPi * std::cosh(t) / (2.0 * ch * ch);
    // x or omx may round to 1.0 near the endpoints; the other coordinate
    // stays accurate, so only a true underflow to 0 drops the point
    if (w == 0.0 || x <= 0.0 || omx <= 0.0) return 0.0;
    const double v = f(x, omx) * w;
    return std::isfinite(v) ? v : 0.0;
  };
  double h = 1.0;
  double sum = contrib(0.0);
  {
    double t = h;
    while (t <= tmax) {
      sum += contrib(t) + contrib(-t);
      t += h;
    }
  }
  double integral = h * sum;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    double t = h;
    while (t <= tmax) {
      add += contrib(t) + contrib(-t);
      t += 2.0 * h;
    }
    sum += add;
    const double next = h * sum;
    if (level >= 3 && std::fabs(next - integral) <= tol * (1.0 + std::fabs(next))) {
      return next;
    }
    integral = next;
  }
  return integral;
}

// FNV-1a over bytes, for config hashing.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace entmix
