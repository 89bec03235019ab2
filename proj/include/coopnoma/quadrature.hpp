#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "coopnoma/errors.hpp"

namespace coopnoma {

struct QuadratureConfig {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  int max_subdivisions = 200;

  void validate() const {
    require(abs_tol > 0.0 && rel_tol > 0.0, "quadrature: tolerances must be positive");
    require(max_subdivisions > 0, "quadrature: max_subdivisions must be positive");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  bool converged = false;
  /// Interval with the largest remaining error estimate, in the variable
  /// the integrand was evaluated in.
  double worst_lo = 0.0;
  double worst_hi = 0.0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1] (nonnegative half).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[static_cast<std::size_t>(j)];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[static_cast<std::size_t>(j)] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(j / 2)] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// The interval with the largest error estimate is bisected until the
/// summed estimate meets max(abs_tol, rel_tol |I|) or the subdivision
/// budget is spent. Endpoints are never evaluated.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureConfig& cfg = {}) {
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod15(f, lo, hi);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int subdivisions = 1;
  auto done = [&] { return error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value)); };
  while (!done() && subdivisions < cfg.max_subdivisions) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const auto left = detail::gauss_kronrod15(f, worst.lo, mid);
    const auto right = detail::gauss_kronrod15(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  double total = 0.0;
  double total_error = 0.0;
  auto copy = heap;
  while (!copy.empty()) {
    total += copy.top().value;
    total_error += copy.top().error;
    copy.pop();
  }
  QuadratureResult r;
  r.value = total;
  r.abs_error = total_error;
  r.subdivisions = subdivisions;
  r.converged = std::isfinite(total) &&
                total_error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total));
  r.worst_lo = heap.top().lo;
  r.worst_hi = heap.top().hi;
  return r;
}

/// Integral of f over [lo, infinity) through x = lo + scale * t / (1 - t).
/// `scale` should be comparable to the decay length of f.
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double lo, double scale,
                                       const QuadratureConfig& cfg = {}) {
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    const double x = lo + scale * t / one_minus;
    const double jac = scale / (one_minus * one_minus);
    if (!std::isfinite(x) || !std::isfinite(jac)) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * jac;
  };
  return integrate(mapped, 0.0, 1.0, cfg);
}

}  // namespace coopnoma
