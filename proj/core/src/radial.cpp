#include <algorithm>
#include <cmath>
#include <numbers>

#include "slm/error.hpp"
#include "slm/marginal.hpp"
#include "slm/numeric.hpp"

namespace slm {

namespace {

double softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// Drop below the peak at which the tails are treated as zero.
constexpr double kTailDrop = 60.0;

}  // namespace

// Writes e^{-lambda r} as a Gaussian scale mixture over u with density
// lambda / sqrt(2 pi) u^{-3/2} e^{-lambda^2 / (2u)}. The inner Gaussian
// integral over t is then explicit, leaving a 1-D integral in v = ln u:
//   N = lambda (2 pi)^{(d-1)/2} int exp(g(v)) dv
//   g(v) = -v/2 - (d/2) ln(1 + e^v) - lambda^2 e^{-v} / 2 - m^2 sigmoid(v) / 2.
double log_radial_integral(int d, double m, double lambda) {
  if (d < 1) throw DomainError("log_radial_integral: d must be positive");
  if (!(lambda >= 0.0)) throw DomainError("log_radial_integral: lambda must be nonnegative");
  if (!(m >= 0.0)) throw DomainError("log_radial_integral: m must be nonnegative");
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  if (lambda == 0.0) return 0.5 * d * log_2pi;

  const double l2 = lambda * lambda, m2 = m * m, hd = 0.5 * d;
  auto g = [&](double v) { return -0.5 * v - hd * softplus(v) - 0.5 * l2 * std::exp(-v) - 0.5 * m2 * sigmoid(v); };

  // The g may have more than one local maximum when m is large; a grid scan
  // locates the global one, and the adaptive rule resolves the rest.
  const double log_l = std::log(lambda);
  const double lo = std::min(2.0 * log_l, log_l - std::log1p(m)) - 12.0 - std::log1p(d);
  const double hi = std::max(2.0 * log_l, 0.0) + 12.0 + std::log1p(d);
  const double step = 0.1;
  double v_star = lo, g_star = g(lo);
  for (double v = lo + step; v <= hi; v += step) {
    const double gv = g(v);
    if (gv > g_star) {
      g_star = gv;
      v_star = v;
    }
  }
  double left = lo, right = hi;
  for (double w = 1.0; g(left) - g_star > -kTailDrop; w *= 2.0) left -= w;
  for (double w = 1.0; g(right) - g_star > -kTailDrop; w *= 2.0) right += w;

  auto shifted = [&](double v) { return g(v) - g_star; };
  const double mass = integrate(shifted, left, v_star) + integrate(shifted, v_star, right);
  return log_l + 0.5 * (d - 1) * log_2pi + g_star + std::log(mass);
}

}  // namespace slm
