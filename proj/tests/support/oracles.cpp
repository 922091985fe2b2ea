#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

// ln Phi(x) without cancellation for large |x|.
double log_phi(double x) {
  if (x < 0) return std::log(0.5 * boost::math::erfc(-x / std::sqrt(2.0)));
  return std::log1p(-0.5 * boost::math::erfc(x / std::sqrt(2.0)));
}

double lse(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Integral of exp(h) over [a, b], with the maximum found on a grid first.
double log_integral(const std::function<double(double)>& h, double a, double b) {
  double peak = -std::numeric_limits<double>::infinity();
  const int grid = 2000;
  double at = a;
  for (int i = 0; i <= grid; ++i) {
    const double x = a + (b - a) * i / grid;
    const double v = h(x);
    if (v > peak) {
      peak = v;
      at = x;
    }
  }
  auto g = [&](double x) { return std::exp(h(x) - peak); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  if (at > a) total += GK::integrate(g, a, at, 15, 1e-13);
  if (at < b) total += GK::integrate(g, at, b, 15, 1e-13);
  return peak + std::log(total);
}

}  // namespace

double log_radial_d1(double m, double lambda) {
  const double c = 0.5 * lambda * lambda + 0.5 * std::log(2.0 * kPi);
  return lse(c - lambda * m + log_phi(m - lambda), c + lambda * m + log_phi(-m - lambda));
}

double log_radial_d3(double m, double lambda) {
  // 4 pi r^2 e^{-(r^2 + m^2)/2} sinh(rm) / (rm), written around the peak of e^{rm}
  auto h = [&](double r) {
    if (r <= 0.0) return -std::numeric_limits<double>::infinity();
    const double x = r * m;
    const double kernel = x == 0.0 ? 0.0 : std::log(-std::expm1(-2.0 * x) / (2.0 * x));
    return std::log(4.0 * kPi) + 2.0 * std::log(r) - 0.5 * (r - m) * (r - m) + kernel - lambda * r;
  };
  return log_integral(h, 0.0, m + 60.0);
}

double log_radial_2d(int d, double m, double lambda) {
  // surface area of the unit sphere S^{d-2}
  const double log_s = std::log(2.0) + 0.5 * (d - 1) * std::log(kPi) - std::lgamma(0.5 * (d - 1));
  auto angular = [&](double x) {
    // ln int_0^pi exp(x (cos phi - 1)) sin^{d-2} phi dphi
    auto g = [&](double phi) {
      const double s = std::sin(phi);
      return std::exp(x * (std::cos(phi) - 1.0)) * (d == 2 ? 1.0 : std::pow(s, d - 2));
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    // for large x the mass sits within a few 1/sqrt(x) of phi = 0; split there
    const double a = x > 0.0 ? std::min(kPi, (10.0 + 2.0 * std::sqrt(double(d))) / std::sqrt(x)) : kPi;
    double v = GK::integrate(g, 0.0, a, 15, 1e-13);
    if (a < kPi) v += GK::integrate(g, a, kPi, 15, 1e-13);
    return std::log(v);
  };
  auto h = [&](double r) {
    if (r <= 0.0) return -std::numeric_limits<double>::infinity();
    return log_s + (d - 1) * std::log(r) - 0.5 * (r - m) * (r - m) - lambda * r + angular(r * m);
  };
  return log_integral(h, 0.0, m + 60.0 + 4.0 * std::sqrt(double(d)));
}

McEstimate mc_radial(int d, double m, double lambda, long samples, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> t(d);
  for (long s = 0; s < samples; ++s) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double v = nd(eng) + (i == 0 ? m : 0.0);
      r2 += v * v;
    }
    const double w = std::exp(-lambda * std::sqrt(r2));
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sum_sq / samples - mean * mean);
  const double scale = std::pow(2.0 * kPi, 0.5 * d);
  return {scale * mean, scale * std::sqrt(var / samples)};
}

namespace {

struct Region {
  Eigen::VectorXd center, half;
  double value = 0.0, error = 0.0;
  int split = 0;
  bool operator<(const Region& o) const { return error < o.error; }
};

struct GenzMalik {
  int n;
  double w1, w2, w3, w4, w5, v1, v2, v3, v4;
  const double l2 = std::sqrt(9.0 / 70.0), l4 = std::sqrt(9.0 / 10.0), l5 = std::sqrt(9.0 / 19.0);

  explicit GenzMalik(int dim) : n(dim) {
    const double nn = n;
    w1 = (12824.0 - 9120.0 * nn + 400.0 * nn * nn) / 19683.0;
    w2 = 980.0 / 6561.0;
    w3 = (1820.0 - 400.0 * nn) / 19683.0;
    w4 = 200.0 / 19683.0;
    w5 = 6859.0 / 19683.0 / std::pow(2.0, nn);
    v1 = (729.0 - 950.0 * nn + 50.0 * nn * nn) / 729.0;
    v2 = 245.0 / 486.0;
    v3 = (265.0 - 100.0 * nn) / 1458.0;
    v4 = 25.0 / 729.0;
  }

  void apply(const std::function<double(const Eigen::VectorXd&)>& f, Region& r, long& evals) const {
    const Eigen::VectorXd& c = r.center;
    const Eigen::VectorXd& h = r.half;
    const double f0 = f(c);
    double s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
    double best_diff = -1.0;
    Eigen::VectorXd x = c;
    for (int i = 0; i < n; ++i) {
      x[i] = c[i] + l2 * h[i];
      const double a = f(x);
      x[i] = c[i] - l2 * h[i];
      const double b = f(x);
      x[i] = c[i] + l4 * h[i];
      const double a4 = f(x);
      x[i] = c[i] - l4 * h[i];
      const double b4 = f(x);
      x[i] = c[i];
      s2 += a + b;
      s3 += a4 + b4;
      const double diff = std::abs(a + b - 2.0 * f0 - (l2 * l2 / (l4 * l4)) * (a4 + b4 - 2.0 * f0));
      if (diff > best_diff) {
        best_diff = diff;
        r.split = i;
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int si : {-1, 1})
          for (int sj : {-1, 1}) {
            x[i] = c[i] + si * l4 * h[i];
            x[j] = c[j] + sj * l4 * h[j];
            s4 += f(x);
            x[i] = c[i];
            x[j] = c[j];
          }
    for (long mask = 0; mask < (1L << n); ++mask) {
      for (int i = 0; i < n; ++i) x[i] = c[i] + ((mask >> i) & 1 ? l5 : -l5) * h[i];
      s5 += f(x);
    }
    evals += 1 + 4L * n + 2L * n * (n - 1) + (1L << n);
    double vol = 1.0;
    for (int i = 0; i < n; ++i) vol *= 2.0 * h[i];
    const double i7 = vol * (w1 * f0 + w2 * s2 + w3 * s3 + w4 * s4 + w5 * s5);
    const double i5 = vol * (v1 * f0 + v2 * s2 + v3 * s3 + v4 * s4);
    r.value = i7;
    r.error = std::abs(i7 - i5);
  }
};

}  // namespace

CubatureResult genz_malik(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi, double rel_tol, long max_evals) {
  const int n = static_cast<int>(lo.size());
  CubatureResult res;
  if (n == 1) {
    auto g = [&](double t) {
      Eigen::VectorXd v(1);
      v[0] = t;
      return f(v);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    // split at the origin where the integrands of interest have a kink
    double err = 0.0;
    if (lo[0] < 0.0 && hi[0] > 0.0)
      res.value = GK::integrate(g, lo[0], 0.0, 30, rel_tol) + GK::integrate(g, 0.0, hi[0], 30, rel_tol);
    else
      res.value = GK::integrate(g, lo[0], hi[0], 30, rel_tol, &err);
    res.error = err;
    return res;
  }
  const GenzMalik rule(n);
  std::priority_queue<Region> heap;
  Region root{(lo + hi) / 2.0, (hi - lo) / 2.0};
  rule.apply(f, root, res.evaluations);
  double total = root.value, err = root.error;
  heap.push(root);
  while (err > rel_tol * std::abs(total) && res.evaluations < max_evals) {
    Region r = heap.top();
    heap.pop();
    total -= r.value;
    err -= r.error;
    Region a = r, b = r;
    a.half[r.split] *= 0.5;
    b.half[r.split] *= 0.5;
    a.center[r.split] -= a.half[r.split];
    b.center[r.split] += b.half[r.split];
    rule.apply(f, a, res.evaluations);
    rule.apply(f, b, res.evaluations);
    total += a.value + b.value;
    err += a.error + b.error;
    heap.push(a);
    heap.push(b);
  }
  // recompute sums exactly to avoid drift from the running updates
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  return res;
}

double brute_force_log_marginal(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, double rel_tol) {
  const int ell = static_cast<int>(x.cols());
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::MatrixXd r = llt.matrixU();
  // M = X R^{-1}: t -> X Q with Q = R^{-1} t
  const Eigen::MatrixXd mmat = r.transpose().triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
  // M has orthonormal columns, so |XQ| = |t| and |y - XQ|^2 = |y|^2 - 2 t.u + |t|^2 with u = M^T y
  const Eigen::VectorXd that = mmat.transpose() * y;
  const double yy = y.squaredNorm();
  auto log_f = [&](const Eigen::VectorXd& t) {
    const double tt = t.squaredNorm();
    return -0.5 * (yy - 2.0 * t.dot(that) + tt) - lambda * std::sqrt(tt);
  };
  // the integrand's mode lies on the ray through the least-squares point
  const double nt = that.norm();
  const Eigen::VectorXd mode = nt > lambda ? Eigen::VectorXd(that * (1.0 - lambda / nt)) : Eigen::VectorXd::Zero(ell);
  const double peak = log_f(mode);
  auto f = [&](const Eigen::VectorXd& t) { return std::exp(log_f(t) - peak); };
  const double half = 8.0;  // the integrand is below peak * exp(-|t - mode|^2 / 2)
  const Eigen::VectorXd lo = mode.array() - half, hi = mode.array() + half;
  const CubatureResult c = genz_malik(f, lo, hi, rel_tol, 400'000'000L);
  // sqrt(det G) cancels against the Jacobian dQ = dt / sqrt(det G)
  return ell * (std::log(lambda) - 0.5 * std::log(kPi)) + peak + std::log(c.value);
}

double effective_sparsity_scan(double q, double k, int p, int n) {
  auto ok = [&](double x) { return x <= 0.0 || x <= k * std::pow(n / std::log(std::exp(1.0) * p / x), q / 2.0); };
  double best = 0.0;
  const int grid = 200000;
  for (int i = 1; i <= grid; ++i) {
    const double x = p * double(i) / grid;
    if (ok(x)) best = x;
  }
  // refine inside the last grid cell
  double lo = best, hi = std::min<double>(p, best + double(p) / grid);
  if (ok(hi)) return hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  // Kolmogorov limit law with Stephens' finite-sample adjustment
  const double x = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  if (x < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace oracle
