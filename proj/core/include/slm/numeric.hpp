#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace slm {

using BigInt = boost::multiprecision::cpp_int;

/// log(sum(exp(x))) over the span in its given order. Uses Neumaier
/// compensation so the result only depends on the element order.
double log_sum_exp(std::span<const double> xs);

double log_gamma(double x);
double log_binomial(double n, double k);

/// ln of a positive big integer; -inf for zero.
double log_big(const BigInt& x);

BigInt big_binomial(int n, int k);
BigInt big_pow(int base, int exponent);
BigInt big_factorial(int n);
/// Stirling numbers of the second kind S(n, k).
BigInt stirling2(int n, int k);
/// Number of partitions of n labelled items into k blocks of size >= 2.
BigInt associated_stirling2(int n, int k);

/// Integral of exp(f) over [a, b] where f is a log-integrand, with the
/// integrand already scaled so its peak is near zero. Adaptive Gauss–Kronrod.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace slm
