#include "slm/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "slm/error.hpp"

namespace slm {

double log_sum_exp(std::span<const double> xs) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : xs) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double term = std::exp(x - peak);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return peak + std::log(sum + comp);
}

double log_gamma(double x) { return boost::math::lgamma(x); }

double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return log_gamma(n + 1) - log_gamma(k + 1) - log_gamma(n - k + 1);
}

double log_big(const BigInt& x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  const unsigned bits = boost::multiprecision::msb(x);
  if (bits < 1000) return std::log(x.convert_to<double>());
  const unsigned shift = bits - 60;
  const BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

BigInt big_binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

BigInt big_pow(int base, int exponent) {
  BigInt r = 1;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

BigInt big_factorial(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

BigInt stirling2(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  // row-by-row recurrence S(i,j) = j S(i-1,j) + S(i-1,j-1)
  std::vector<BigInt> row(k + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = std::min(i, k); j >= 1; --j) row[j] = j * row[j] + row[j - 1];
    row[0] = 0;
  }
  return row[k];
}

BigInt associated_stirling2(int n, int k) {
  if (n < 0 || k < 0) return 0;
  // S2(i,j) = j S2(i-1,j) + (i-1) S2(i-2,j-1)
  std::vector<std::vector<BigInt>> t(n + 1, std::vector<BigInt>(k + 1, 0));
  t[0][0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= k; ++j) {
      t[i][j] = j * t[i - 1][j];
      if (i >= 2) t[i][j] += (i - 1) * t[i - 2][j - 1];
    }
  return t[n][k];
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  auto g = [&f](double x) { return std::exp(f(x)); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(g, a, b, 20, rel_tol, &err);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace slm
