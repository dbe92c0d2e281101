#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <queue>
#include <vector>

#include "imlab/errors.hpp"

namespace imlab {

template <std::floating_point Scalar>
struct QuadratureResult {
  Scalar value;
  Scalar error;
  int intervals;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
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

template <std::floating_point Scalar>
struct Panel {
  Scalar lo, hi, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <std::floating_point Scalar, class F>
Panel<Scalar> kronrod_panel(F& f, Scalar lo, Scalar hi) {
  const Scalar mid = (lo + hi) / 2;
  const Scalar half = (hi - lo) / 2;
  const Scalar f_mid = f(mid);
  Scalar kronrod = f_mid * Scalar(kKronrodWeights[7]);
  Scalar gauss = f_mid * Scalar(kGaussWeights[3]);
  for (int i = 0; i < 7; ++i) {
    const Scalar dx = half * Scalar(kKronrodNodes[i]);
    const Scalar pair = f(mid - dx) + f(mid + dx);
    kronrod += Scalar(kKronrodWeights[i]) * pair;
    if (i % 2 == 1) gauss += Scalar(kGaussWeights[i / 2]) * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (G7/K15) quadrature of f over [lo, hi].
/// Bisects the panel with the largest error estimate until the summed
/// estimate is within max(abs_tol, rel_tol * |value|).
template <std::floating_point Scalar, class F>
QuadratureResult<Scalar> integrate_adaptive(F&& f, Scalar lo, Scalar hi, Scalar abs_tol,
                                            Scalar rel_tol = 0, int max_intervals = 4000) {
  using Panel = detail::Panel<Scalar>;
  std::priority_queue<Panel> panels;
  panels.push(detail::kronrod_panel<Scalar>(f, lo, hi));
  Scalar value = panels.top().value;
  Scalar error = panels.top().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (static_cast<int>(panels.size()) >= max_intervals) {
      throw ConvergenceError("integrate_adaptive: interval budget exhausted");
    }
    const Panel worst = panels.top();
    panels.pop();
    const Scalar mid = (worst.lo + worst.hi) / 2;
    const Panel left = detail::kronrod_panel<Scalar>(f, worst.lo, mid);
    const Panel right = detail::kronrod_panel<Scalar>(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to shed the drift of the incremental updates.
  value = 0;
  error = 0;
  const int count = static_cast<int>(panels.size());
  while (!panels.empty()) {
    value += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  return {value, error, count};
}

}  // namespace imlab
