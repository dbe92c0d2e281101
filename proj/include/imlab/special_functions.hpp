#pragma once

// Real-argument special functions used by the interference model and the
// ML-G detector: log Gamma, log I_k (modified Bessel, first kind) and the
// Kummer confluent hypergeometric function 1F1(a; b; z) for a, b > 0, z >= 0.
//
// Everything is templated on the floating-point scalar and header-only.

#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "imlab/errors.hpp"

namespace imlab {

/// Hard cap on the number of terms summed by any series in this header.
inline constexpr int kSeriesTermCap = 10000;

namespace detail {

template <std::floating_point Scalar>
constexpr Scalar series_tolerance() {
  // 1e-16 relative for double and wider; float cannot resolve that.
  constexpr Scalar quarter_eps = std::numeric_limits<Scalar>::epsilon() / 4;
  return quarter_eps > Scalar(1e-16) ? quarter_eps : Scalar(1e-16);
}

// ln|Gamma(x)|. glibc lgamma() writes the global `signgam`; the reentrant
// variants do not.
inline double lgamma_abs(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline long double lgamma_abs(long double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline float lgamma_abs(float x) {
  return static_cast<float>(lgamma_abs(static_cast<double>(x)));
}

// Largest power of ten we let a running positive sum reach before rescaling.
template <std::floating_point Scalar>
constexpr int rescale_exponent() {
  return std::numeric_limits<Scalar>::max_exponent10 - 28;
}

// ln I_k(z) from the ascending series
//   I_k(z) = (z/2)^k / k! * sum_n (z^2/4)^n / (n! (k+1)_n),
// summed with periodic rescaling so it never overflows.
template <std::floating_point Scalar>
Scalar log_bessel_i_series(int k, Scalar z) {
  const Scalar tol = series_tolerance<Scalar>();
  const Scalar q = z * z / 4;
  const Scalar big = std::pow(Scalar(10), Scalar(rescale_exponent<Scalar>()));
  Scalar term = 1;
  Scalar sum = 1;
  Scalar log_scale = 0;
  for (int n = 0; n < kSeriesTermCap; ++n) {
    term *= q / (Scalar(n + 1) * Scalar(n + 1 + k));
    sum += term;
    if (term < tol * sum) {
      return Scalar(k) * std::log(z / 2) - lgamma_abs(Scalar(k + 1)) +
             std::log(sum) + log_scale;
    }
    if (sum > big) {
      sum /= big;
      term /= big;
      log_scale += std::log(big);
    }
  }
  throw ConvergenceError("log_bessel_i: power series did not converge within " +
                         std::to_string(kSeriesTermCap) + " terms");
}

// ln I_k(z) from the large-argument expansion of the scaled function
//   e^{-z} I_k(z) ~ (2 pi z)^{-1/2} sum_j (-1)^j a_j(k) / z^j.
// Returns nullopt when the asymptotic terms stop shrinking before reaching
// full precision (z too small relative to k).
template <std::floating_point Scalar>
std::optional<Scalar> log_bessel_i_asymptotic(int k, Scalar z) {
  const Scalar tol = series_tolerance<Scalar>();
  const Scalar mu = Scalar(4) * Scalar(k) * Scalar(k);
  Scalar term = 1;
  Scalar sum = 1;
  for (int j = 1; j < kSeriesTermCap; ++j) {
    const Scalar odd = Scalar(2 * j - 1);
    const Scalar next = -term * (mu - odd * odd) / (Scalar(8 * j) * z);
    if (next == 0) break;
    if (std::abs(next) >= std::abs(term)) return std::nullopt;
    term = next;
    sum += term;
    if (std::abs(term) < tol * std::abs(sum)) break;
  }
  if (!(sum > 0)) return std::nullopt;
  return z - Scalar(0.5) * std::log(2 * std::numbers::pi_v<Scalar> * z) + std::log(sum);
}

template <std::floating_point Scalar>
void require_kummer_domain(Scalar a, Scalar b, Scalar z, const char* who) {
  if (!(a > 0) || !(b > 0) || !(z >= 0) || !std::isfinite(a) || !std::isfinite(b) ||
      !std::isfinite(z)) {
    throw DomainError(std::string(who) + ": requires a > 0, b > 0, z >= 0 (finite)");
  }
}

// Ascending series for ln 1F1(a; b; z); all terms positive in this regime.
template <std::floating_point Scalar>
Scalar log_kummer_series(Scalar a, Scalar b, Scalar z) {
  const Scalar tol = series_tolerance<Scalar>();
  const Scalar big = std::pow(Scalar(10), Scalar(rescale_exponent<Scalar>()));
  Scalar term = 1;
  Scalar sum = 1;
  Scalar log_scale = 0;
  for (int n = 0; n < kSeriesTermCap; ++n) {
    term *= (a + Scalar(n)) / (b + Scalar(n)) * z / Scalar(n + 1);
    sum += term;
    if (term < tol * sum) return std::log(sum) + log_scale;
    if (sum > big) {
      sum /= big;
      term /= big;
      log_scale += std::log(big);
    }
  }
  throw ConvergenceError("kummer_1f1: ascending series did not converge within " +
                         std::to_string(kSeriesTermCap) + " terms");
}

// Large-z expansion
//   1F1(a;b;z) ~ Gamma(b)/Gamma(a) e^z z^{a-b} sum_s (b-a)_s (1-a)_s / (s! z^s)
// plus a recessive term of order Gamma(b)/Gamma(b-a) z^{-a}. Only used when
// the dominant series reaches full precision and the recessive term is below
// it; otherwise nullopt.
template <std::floating_point Scalar>
std::optional<Scalar> log_kummer_asymptotic(Scalar a, Scalar b, Scalar z) {
  const Scalar tol = series_tolerance<Scalar>();
  const Scalar log_leading = lgamma_abs(b) - lgamma_abs(a) + z + (a - b) * std::log(z);

  const Scalar c = b - a;
  const bool recessive_vanishes = c <= 0 && c == std::floor(c);
  if (!recessive_vanishes) {
    const Scalar log_recessive =
        lgamma_abs(b) - lgamma_abs(c) - a * std::log(z);
    if (log_recessive - log_leading > std::log(tol) - 4) return std::nullopt;
  }

  Scalar term = 1;
  Scalar sum = 1;
  for (int s = 0; s < kSeriesTermCap; ++s) {
    const Scalar next = term * (c + Scalar(s)) * (Scalar(1) - a + Scalar(s)) / (Scalar(s + 1) * z);
    if (next == 0) break;
    if (std::abs(next) >= std::abs(term)) return std::nullopt;
    term = next;
    sum += term;
    if (std::abs(term) < tol * std::abs(sum)) break;
  }
  if (!(sum > 0)) return std::nullopt;
  return log_leading + std::log(sum);
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
template <std::floating_point Scalar>
Scalar log_gamma(Scalar x) {
  if (!(x > 0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite");
  }
  return detail::lgamma_abs(x);
}

/// ln I_k(z), the modified Bessel function of the first kind of integer
/// order k >= 0. Returns -inf for I_k(0) = 0 (k >= 1). Small arguments use the
/// power series; large ones the exponentially scaled asymptotic form, so the
/// result stays finite far beyond where I_k itself overflows.
template <std::floating_point Scalar>
Scalar log_bessel_i(int k, Scalar z) {
  if (k < 0) throw DomainError("log_bessel_i: order must be non-negative");
  if (!(z >= 0) || !std::isfinite(z)) {
    throw DomainError("log_bessel_i: argument must be non-negative and finite");
  }
  if (z == 0) return k == 0 ? Scalar(0) : -std::numeric_limits<Scalar>::infinity();
  if (z > Scalar(30)) {
    if (auto v = detail::log_bessel_i_asymptotic(k, z)) return *v;
  }
  return detail::log_bessel_i_series(k, z);
}

/// e^{-z} I_k(z).
template <std::floating_point Scalar>
Scalar scaled_bessel_i(int k, Scalar z) {
  return std::exp(log_bessel_i(k, z) - z);
}

/// 1F1(a; b; z) for a, b > 0 and z >= 0 by the ascending power series. The
/// sum stops once the next term falls below 1e-16 of the partial sum.
/// Throws std::overflow_error if the value is not representable; use
/// log_kummer_1f1 for large z.
template <std::floating_point Scalar>
Scalar kummer_1f1(Scalar a, Scalar b, Scalar z) {
  detail::require_kummer_domain(a, b, z, "kummer_1f1");
  const Scalar tol = detail::series_tolerance<Scalar>();
  Scalar term = 1;
  Scalar sum = 1;
  for (int n = 0; n < kSeriesTermCap; ++n) {
    term *= (a + Scalar(n)) / (b + Scalar(n)) * z / Scalar(n + 1);
    sum += term;
    if (!std::isfinite(sum)) throw std::overflow_error("kummer_1f1: value overflows");
    if (term < tol * sum) return sum;
  }
  throw ConvergenceError("kummer_1f1: ascending series did not converge within " +
                         std::to_string(kSeriesTermCap) + " terms");
}

/// ln 1F1(a; b; z) for a, b > 0 and z >= 0. Uses the rescaled ascending series,
/// switching to the large-z expansion once it is accurate to full precision.
template <std::floating_point Scalar>
Scalar log_kummer_1f1(Scalar a, Scalar b, Scalar z) {
  detail::require_kummer_domain(a, b, z, "log_kummer_1f1");
  if (z > Scalar(30)) {
    if (auto v = detail::log_kummer_asymptotic(a, b, z)) return *v;
  }
  return detail::log_kummer_series(a, b, z);
}

}  // namespace imlab
