// Test-only reference implementations, independent of the library paths they
// check.
#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracles {

// Regularized incomplete beta by adaptive Simpson quadrature. Valid for
// a, b >= 1 (no endpoint singularities).
inline double ibeta_quadrature(double a, double b, double x) {
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  auto f = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp((a - 1) * std::log(t) + (b - 1) * std::log1p(-t) - log_beta);
  };
  std::function<double(double, double, double, double, double, int)> simpson =
      [&](double lo, double hi, double flo, double fhi, double whole, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    const double left = (lo - mid) / -6.0 * (flo + 4 * f(0.5 * (lo + mid)) + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4 * f(0.5 * (mid + hi)) + fhi);
    if (depth > 40 || std::abs(left + right - whole) < 1e-13)
      return left + right + (left + right - whole) / 15.0;
    return simpson(lo, mid, flo, fmid, left, depth + 1) +
           simpson(mid, hi, fmid, fhi, right, depth + 1);
  };
  const double whole = (x - 0.0) / 6.0 * (f(0.0) + 4 * f(0.5 * x) + f(x));
  return simpson(0.0, x, f(0.0), f(x), whole, 0);
}

// Quantile by bisection on the quadrature CDF.
inline double ibeta_inverse_bisect(double p, double a, double b) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ibeta_quadrature(a, b, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Riemann-sum integral of a scalar function on [a, b].
inline double riemann(const std::function<double(double)>& f, double a, double b, int n = 2000000) {
  double total = 0.0;
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) total += f(a + (i + 0.5) * h);
  return total * h;
}

// Exhaustive shortest-interval scan over a piecewise-linear worst-case pair,
// reimplemented from scratch: candidate lower ends are every breakpoint plus
// every preimage of an upper-side breakpoint value shifted by alpha.
struct PlaFn {
  std::vector<double> x;  // breakpoints
  std::vector<double> y;  // values

  double eval(double q) const {
    if (q <= x.front()) return y.front();
    if (q >= x.back()) return y.back();
    size_t k = 1;
    while (x[k] < q) ++k;
    if (x[k] == q) return y[k];
    const double t = (q - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + t * (y[k] - y[k - 1]);
  }
  std::optional<double> inv_min(double target) const {
    if (target <= y.front()) return x.front();
    if (target > y.back() + 1e-15) return std::nullopt;
    size_t k = 1;
    while (y[k] < target) ++k;
    // y[k-1] < target <= y[k], so this segment rises.
    return x[k - 1] + (target - y[k - 1]) * (x[k] - x[k - 1]) / (y[k] - y[k - 1]);
  }
};

struct ScanResult {
  double lo, hi;
  double width() const { return hi - lo; }
};

inline std::optional<ScanResult> shortest_interval_bruteforce(const PlaFn& down, const PlaFn& up,
                                                              double alpha) {
  std::vector<double> cands = down.x;
  for (double v : up.y) {
    // lower end where the downside CDF reads v - alpha
    const double target = v - alpha;
    if (target < down.y.front() - 1e-15) continue;
    auto pre = down.inv_min(target);
    if (pre) cands.push_back(*pre);
  }
  std::optional<ScanResult> best;
  for (double lo : cands) {
    auto hi = up.inv_min(alpha + down.eval(lo));
    if (!hi) continue;
    ScanResult r{lo, std::max(*hi, lo)};
    if (!best || r.width() < best->width() - 1e-15) best = r;
  }
  return best;
}

}  // namespace oracles
